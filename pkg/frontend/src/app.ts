/** Single-page annotator client.
 *
 * The server is the only source of truth: the client persists nothing but
 * the annotator id (for session resume). Screens: registration, survey
 * choice, re-annotation tag flip, done. Submission stays disabled until an
 * explicit choice is made, and a duplicate-submission conflict from the
 * server counts as "already recorded" and simply advances.
 */

import {
  AnnotatorApi,
  FinalTag,
  NextTask,
  Progress,
  ReannotationTask,
  SurveyChoice,
  SurveyItem,
} from './api.js';

const STORAGE_KEY = 'annotator_id';

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export class App {
  private annotatorId: string | null = null;
  private busy = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: AnnotatorApi,
    private readonly storage: Storage,
  ) {}

  /** Entry point: resume the stored session or ask for registration. */
  async start(): Promise<void> {
    this.annotatorId = this.storage.getItem(STORAGE_KEY);
    if (this.annotatorId === null) {
      this.renderRegistration();
      return;
    }
    await this.advance();
  }

  /** Fetch and show the next unanswered task; surveys first, then
   * re-annotation, then the done screen. */
  private async advance(): Promise<void> {
    await this.guard(async () => {
      const id = this.annotatorId as string;
      const survey = await this.api.nextTask<SurveyItem>('survey', id);
      if (!survey.done && survey.task) {
        this.renderSurvey(survey.task, survey.progress);
        return;
      }
      const reann = await this.api.nextTask<ReannotationTask>('reannotation', id);
      if (!reann.done && reann.task) {
        this.renderReannotation(reann.task, reann.progress);
        return;
      }
      this.renderDone(survey.progress, reann.progress);
    });
  }

  /** Run an async step; on failure render a retry affordance instead of
   * losing the step. */
  private async guard(step: () => Promise<void>): Promise<void> {
    try {
      await step();
    } catch (err) {
      this.renderError(String(err), () => this.guard(step));
    }
  }

  // -- screens ---------------------------------------------------------

  private renderRegistration(): void {
    this.root.innerHTML = `
      <section id="screen" data-screen="register">
        <h1>Word preference study</h1>
        <p>Tell us a little about yourself to begin.</p>
        <label>Age (required)
          <input id="age" type="number" min="0" step="1" />
        </label>
        <label>Education (optional)
          <input id="education" type="text" />
        </label>
        <p id="form-error" role="alert" hidden></p>
        <button id="register">Start</button>
      </section>`;
    const ageInput = this.q<HTMLInputElement>('#age');
    const educationInput = this.q<HTMLInputElement>('#education');
    const error = this.q<HTMLElement>('#form-error');
    this.q<HTMLButtonElement>('#register').addEventListener('click', () => {
      const age = Number.parseInt(ageInput.value, 10);
      if (ageInput.value.trim() === '' || Number.isNaN(age) || age < 0) {
        error.hidden = false;
        error.textContent = 'Please enter your age.';
        return;
      }
      void this.guard(async () => {
        const id = await this.api.register(age, educationInput.value.trim() || undefined);
        this.storage.setItem(STORAGE_KEY, id);
        this.annotatorId = id;
        await this.advance();
      });
    });
  }

  private renderSurvey(item: SurveyItem, progress: Progress): void {
    this.root.innerHTML = `
      <section id="screen" data-screen="survey" data-item-id="${esc(item.item_id)}"
               data-word="${esc(item.word)}">
        <h1>Which sentence feels more natural?</h1>
        <p id="progress">${progress.answered} / ${progress.total}</p>
        <form id="choices">
          <label class="option">
            <input type="radio" name="choice" value="FOREIGN" />
            <span>${esc(item.sentence_foreign)}</span>
          </label>
          <label class="option">
            <input type="radio" name="choice" value="NATIVE" />
            <span>${esc(item.sentence_native)}</span>
          </label>
          <label class="option">
            <input type="radio" name="choice" value="NEITHER" />
            <span>None of the above</span>
          </label>
        </form>
        <button id="submit" disabled>Submit</button>
      </section>`;
    const submit = this.q<HTMLButtonElement>('#submit');
    const radios = Array.from(
      this.root.querySelectorAll<HTMLInputElement>('input[name="choice"]'),
    );
    for (const radio of radios) {
      radio.addEventListener('change', () => {
        submit.disabled = false;
      });
    }
    submit.addEventListener('click', () => {
      const picked = radios.find((r) => r.checked);
      if (!picked || this.busy) return;
      this.busy = true;
      submit.disabled = true;
      void this.guard(async () => {
        await this.api.submitSurvey(
          this.annotatorId as string,
          item.item_id,
          picked.value as SurveyChoice,
        );
        await this.advance();
      }).finally(() => {
        this.busy = false;
      });
    });
  }

  private renderReannotation(task: ReannotationTask, progress: Progress): void {
    const tokens = task.tokens
      .map((token, index) => {
        const target = index === task.target_index;
        const cls = target ? 'token target' : 'token';
        const tag = target ? ` <small>(currently ${esc(token.g)})</small>` : '';
        return `<span class="${cls}" data-index="${index}">${esc(token.t)}${tag}</span>`;
      })
      .join(' ');
    this.root.innerHTML = `
      <section id="screen" data-screen="reannotation"
               data-task-id="${esc(task.task_id)}" data-word="${esc(task.word)}">
        <h1>Re-check the highlighted word's language tag</h1>
        <p id="progress">${progress.answered} / ${progress.total}</p>
        <p id="tweet">${tokens}</p>
        <form id="choices">
          <label class="option">
            <input type="radio" name="final-tag" value="L2" />
            <span>Keep the foreign tag</span>
          </label>
          <label class="option">
            <input type="radio" name="final-tag" value="L1" />
            <span>Switch to the native tag</span>
          </label>
        </form>
        <button id="submit" disabled>Submit</button>
      </section>`;
    const submit = this.q<HTMLButtonElement>('#submit');
    const radios = Array.from(
      this.root.querySelectorAll<HTMLInputElement>('input[name="final-tag"]'),
    );
    for (const radio of radios) {
      radio.addEventListener('change', () => {
        submit.disabled = false;
      });
    }
    submit.addEventListener('click', () => {
      const picked = radios.find((r) => r.checked);
      if (!picked || this.busy) return;
      this.busy = true;
      submit.disabled = true;
      void this.guard(async () => {
        await this.api.submitReannotation(
          this.annotatorId as string,
          task.task_id,
          picked.value as FinalTag,
        );
        await this.advance();
      }).finally(() => {
        this.busy = false;
      });
    });
  }

  private renderDone(survey: Progress, reann: Progress): void {
    this.root.innerHTML = `
      <section id="screen" data-screen="done">
        <h1>All done, thank you!</h1>
        <p id="progress">${survey.answered + reann.answered} answers recorded.</p>
      </section>`;
  }

  private renderError(message: string, retry: () => void): void {
    this.root.innerHTML = `
      <section id="screen" data-screen="error">
        <h1>Something went wrong</h1>
        <p id="error-message" role="alert">${esc(message)}</p>
        <p>Your answers are safe; nothing was lost.</p>
        <button id="retry">Try again</button>
      </section>`;
    this.q<HTMLButtonElement>('#retry').addEventListener('click', retry);
  }

  private q<T extends Element>(selector: string): T {
    const el = this.root.querySelector<T>(selector);
    if (!el) throw new Error(`missing element ${selector}`);
    return el;
  }
}

export function mountApp(
  root: HTMLElement,
  api: AnnotatorApi,
  storage: Storage = window.localStorage,
): Promise<App> {
  const app = new App(root, api, storage);
  return app.start().then(() => app);
}
