/** Typed client for the annotation-collection service. */

export interface SurveyItem {
  item_id: string;
  word: string;
  sentence_foreign: string;
  sentence_native: string;
}

export interface TaskToken {
  t: string;
  g: string;
}

export interface ReannotationTask {
  task_id: string;
  word: string;
  stratum: string;
  context_mode: string;
  tokens: TaskToken[];
  target_index: number;
}

export interface Progress {
  answered: number;
  total: number;
}

export interface NextTask<T> {
  done: boolean;
  task: T | null;
  progress: Progress;
}

export type TaskKind = 'survey' | 'reannotation';
export type SurveyChoice = 'FOREIGN' | 'NATIVE' | 'NEITHER';
export type FinalTag = 'L1' | 'L2';

/** Submit outcome: a 409 means the answer is already recorded server-side,
 * which the UI treats the same as success (advance, nothing lost). */
export type SubmitOutcome = 'ok' | 'already-recorded';

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = 'ApiError';
  }
}

async function request(url: string, init?: RequestInit): Promise<Response> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(`network failure: ${String(err)}`);
  }
  return response;
}

export class AnnotatorApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async register(age: number, education?: string): Promise<string> {
    const response = await request(this.url('/annotators'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ age, education: education || null }),
    });
    if (!response.ok) {
      throw new ApiError(`registration failed (${response.status})`, response.status);
    }
    const body = (await response.json()) as { annotator_id: string };
    return body.annotator_id;
  }

  async nextTask<T>(kind: TaskKind, annotatorId: string): Promise<NextTask<T>> {
    const response = await request(
      this.url(`/tasks/${kind}/next?annotator=${encodeURIComponent(annotatorId)}`),
    );
    if (!response.ok) {
      throw new ApiError(`next ${kind} task failed (${response.status})`, response.status);
    }
    return (await response.json()) as NextTask<T>;
  }

  private async submit(path: string, payload: object): Promise<SubmitOutcome> {
    const response = await request(this.url(path), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
    if (response.status === 409) return 'already-recorded';
    if (!response.ok) {
      throw new ApiError(`submission failed (${response.status})`, response.status);
    }
    return 'ok';
  }

  submitSurvey(
    annotatorId: string,
    itemId: string,
    choice: SurveyChoice,
  ): Promise<SubmitOutcome> {
    return this.submit('/responses/survey', {
      annotator_id: annotatorId,
      item_id: itemId,
      choice,
    });
  }

  submitReannotation(
    annotatorId: string,
    taskId: string,
    finalTag: FinalTag,
  ): Promise<SubmitOutcome> {
    return this.submit('/responses/reannotation', {
      annotator_id: annotatorId,
      task_id: taskId,
      final_tag: finalTag,
    });
  }
}
