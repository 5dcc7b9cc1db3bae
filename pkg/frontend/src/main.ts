/**
 * Browser entry point. Configuration comes from query parameters:
 *
 *   ?base=http://127.0.0.1:8000&collection=trip            start a session
 *   ?base=http://127.0.0.1:8000&session=<id>               resume a session
 *   &engine=baseline                                       optional engine
 */

import { ChatApp } from './app.js';

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get('base') ?? 'http://127.0.0.1:8000';
  const root = document.getElementById('app');
  if (!root) {
    throw new Error('missing #app element');
  }
  const sessionId = params.get('session');
  if (sessionId) {
    await ChatApp.resume(root, { baseUrl, sessionId });
    return;
  }
  const collectionId = params.get('collection');
  if (!collectionId) {
    root.textContent = 'Pass ?collection=<id> to start a session or ?session=<id> to resume one.';
    return;
  }
  const engine = params.get('engine') === 'baseline' ? 'baseline' : 'reviver';
  await ChatApp.start(root, { baseUrl, collectionId, engine });
}

void boot();
