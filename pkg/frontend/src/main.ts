import { AnnotatorApi } from './api.js';
import { mountApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('service') ?? 'http://127.0.0.1:8077';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app container');

void mountApp(root, new AnnotatorApi(baseUrl));
