/** Browser bootstrap: base URL from ?api=…, default localhost service. */

import { ApiClient } from './api.js';
import { ExplorerApp } from './app.js';

const DEFAULT_BASE_URL = 'http://127.0.0.1:8000';

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  return (fromQuery ?? DEFAULT_BASE_URL).replace(/\/+$/, '');
}

document.addEventListener('DOMContentLoaded', () => {
  const root = document.getElementById('app');
  if (!root) {
    throw new Error('missing #app mount point');
  }
  const app = new ExplorerApp(root, new ApiClient(baseUrl()));
  void app.start();
});
