import type { FetchLike } from '../src/api.js';

export async function waitFor(predicate: () => boolean, timeoutMs = 15_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
  throw new Error('condition not met in time');
}

/** Minimal Response stand-in for stubbed fetch functions. */
export function jsonResponse(body: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  } as unknown as Response;
}

/** Real network fetch, independent of whatever jsdom puts on the window. */
export const realFetch: FetchLike = (input, init) => globalThis.fetch(input, init);

export function freshRoot(): HTMLElement {
  const root = document.createElement('div');
  document.body.appendChild(root);
  return root;
}

export function userTurnTexts(root: HTMLElement): string[] {
  return Array.from(root.querySelectorAll<HTMLElement>('li.turn-user'), (el) =>
    (el.textContent ?? '').replace(/^You: /, ''),
  );
}

export function botTurnCount(root: HTMLElement): number {
  return root.querySelectorAll('li.turn-bot').length;
}
