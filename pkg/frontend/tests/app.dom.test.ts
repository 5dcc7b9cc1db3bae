/**
 * Integration tests against the real session service in mock mode
 * (spawned by the global setup). jsdom provides the DOM; quick-action
 * buttons and forms are native elements, so a `click()` here is exactly
 * what keyboard activation (Enter/Space) triggers in a browser.
 */

import { afterEach, describe, expect, inject, it } from 'vitest';

import { ChatApp } from '../src/app.js';
import { botTurnCount, freshRoot, realFetch, userTurnTexts, waitFor } from './helpers.js';

const baseUrl = inject('baseUrl');
const collectionId = inject('collectionId');
const flakyCollectionId = inject('flakyCollectionId');

afterEach(() => {
  document.body.innerHTML = '';
});

function quickButton(root: HTMLElement, command: string): HTMLButtonElement {
  const button = root.querySelector<HTMLButtonElement>(`button[data-command="${command}"]`);
  if (!button) {
    throw new Error(`missing quick action ${command}`);
  }
  return button;
}

async function clickWhenReady(app: ChatApp, button: HTMLButtonElement): Promise<void> {
  await waitFor(() => !button.disabled || app.view.phase === 'concluded');
  if (app.view.phase === 'concluded') {
    return;
  }
  const turnsBefore = app.view.turns.length;
  button.click();
  await waitFor(() => !app.view.pending && app.view.turns.length > turnsBefore);
}

describe('full session via quick actions', () => {
  it('covers all three scenes, concludes, and announces every bot turn exactly once', async () => {
    const root = freshRoot();
    const app = await ChatApp.start(root, { baseUrl, collectionId, fetchFn: realFetch });

    // The opening storyline is rendered and announced.
    expect(botTurnCount(root)).toBe(1);
    expect(app.announcer.announcedTexts()).toEqual([app.view.turns[0]!.text]);
    expect(root.querySelector('[data-testid="progress"]')!.textContent).toBe('0 of 3');

    const okay = quickButton(root, 'Okay');
    const goOn = quickButton(root, 'Go on');
    for (let round = 0; app.view.phase !== 'concluded' && round < 30; round += 1) {
      await clickWhenReady(app, round % 2 === 0 ? okay : goOn);
    }

    expect(app.view.phase).toBe('concluded');
    expect(root.querySelector('[data-testid="progress"]')!.textContent).toBe('3 of 3');

    // Quick actions and the composer lock once the story is over.
    expect(okay.disabled).toBe(true);
    expect(quickButton(root, 'Next scene').disabled).toBe(true);
    expect(root.querySelector<HTMLButtonElement>('.composer button')!.disabled).toBe(true);

    // Announced exactly once, in order, nothing extra.
    const botTexts = app.view.turns.filter((turn) => turn.speaker === 'bot').map((turn) => turn.text);
    expect(app.announcer.announcedTexts()).toEqual(botTexts);

    // The rendered view is a pure projection of the transcript endpoint.
    const transcript = await (await fetch(`${baseUrl}/sessions/${app.view.sessionId}/transcript`)).json();
    expect(app.view.turns.map((turn) => turn.text)).toEqual(transcript.turns.map((turn: { text: string }) => turn.text));

    // Guidance is visually and semantically separated inside bot bubbles.
    const guidanceNodes = root.querySelectorAll('li.turn-bot .guidance');
    expect(guidanceNodes.length).toBeGreaterThan(0);
    for (const node of guidanceNodes) {
      expect(node.getAttribute('role')).toBe('note');
      expect(node.previousElementSibling?.tagName).toBe('HR');
    }
  });

  it('reconstructs the identical view from the transcript on resume, announcing nothing', async () => {
    const root = freshRoot();
    const app = await ChatApp.start(root, { baseUrl, collectionId, fetchFn: realFetch });
    await clickWhenReady(app, quickButton(root, 'Okay'));
    await clickWhenReady(app, quickButton(root, 'Go on'));

    const resumedRoot = freshRoot();
    const resumed = await ChatApp.resume(resumedRoot, {
      baseUrl,
      sessionId: app.view.sessionId,
      fetchFn: realFetch,
    });
    expect(resumed.view.turns).toEqual(app.view.turns);
    expect(resumed.view.progress).toEqual(app.view.progress);
    expect(resumed.announcer.announcedTexts()).toEqual([]);
    expect(resumedRoot.querySelector('.chat-log')!.innerHTML).toBe(root.querySelector('.chat-log')!.innerHTML);
  });
});

describe('quick actions and keyboard operability', () => {
  it('injects the exact command texts', async () => {
    const root = freshRoot();
    const app = await ChatApp.start(root, { baseUrl, collectionId, fetchFn: realFetch });

    await clickWhenReady(app, quickButton(root, 'Next scene'));
    expect(userTurnTexts(root).at(-1)).toBe('Next scene');

    const switchInput = root.querySelector<HTMLInputElement>('.switch-form input')!;
    const switchForm = root.querySelector<HTMLFormElement>('.switch-form')!;
    await waitFor(() => !switchInput.disabled);
    switchInput.value = 'the canteen';
    const turnsBefore = app.view.turns.length;
    switchForm.dispatchEvent(new Event('submit', { bubbles: true, cancelable: true }));
    await waitFor(() => !app.view.pending && app.view.turns.length > turnsBefore);
    expect(userTurnTexts(root).at(-1)).toBe("Let's talk about the canteen");

    const state = await (await fetch(`${baseUrl}/sessions/${app.view.sessionId}/state`)).json();
    expect(state.current_scene).toBe(2); // the canteen scene
  });

  it('every control is a native focusable element in reading order', async () => {
    const root = freshRoot();
    const app = await ChatApp.start(root, { baseUrl, collectionId, fetchFn: realFetch });
    await waitFor(() => !app.view.pending);

    const interactive = Array.from(root.querySelectorAll<HTMLElement>('button, input'));
    expect(interactive.length).toBeGreaterThanOrEqual(7); // retry, dismiss, 3 quick, switch, composer
    for (const element of interactive) {
      expect(['BUTTON', 'INPUT']).toContain(element.tagName);
      expect(element.tabIndex).toBeGreaterThanOrEqual(0);
    }

    // Focus order follows reading order: conversation, quick actions,
    // switch field, then the composer.
    const log = root.querySelector('.chat-log')!;
    const quick = root.querySelector('.quick-actions')!;
    const composer = root.querySelector('.composer')!;
    expect(log.compareDocumentPosition(quick) & Node.DOCUMENT_POSITION_FOLLOWING).toBeTruthy();
    expect(quick.compareDocumentPosition(composer) & Node.DOCUMENT_POSITION_FOLLOWING).toBeTruthy();

    const okay = quickButton(root, 'Okay');
    okay.focus();
    expect(document.activeElement).toBe(okay);

    // Sending from the composer (form submit = pressing Enter) works.
    const composerInput = root.querySelector<HTMLInputElement>('.composer input')!;
    composerInput.value = 'What was the weather like?';
    const turnsBefore = app.view.turns.length;
    composer.dispatchEvent(new Event('submit', { bubbles: true, cancelable: true }));
    await waitFor(() => !app.view.pending && app.view.turns.length > turnsBefore);
    expect(userTurnTexts(root).at(-1)).toBe('What was the weather like?');
  });
});

describe('error paths', () => {
  it('announces a dismissible notice when messaging a concluded session', async () => {
    const rootA = freshRoot();
    const appA = await ChatApp.start(rootA, { baseUrl, collectionId, fetchFn: realFetch });
    const rootB = freshRoot();
    const appB = await ChatApp.resume(rootB, { baseUrl, sessionId: appA.view.sessionId, fetchFn: realFetch });

    const okayA = quickButton(rootA, 'Okay');
    for (let round = 0; appA.view.phase !== 'concluded' && round < 30; round += 1) {
      await clickWhenReady(appA, okayA);
    }
    expect(appA.view.phase).toBe('concluded');

    // App B still believes the session is open; its next send gets a 409.
    const okayB = quickButton(rootB, 'Okay');
    okayB.click();
    await waitFor(() => !rootB.querySelector<HTMLElement>('.notice')!.hidden);
    const notice = rootB.querySelector<HTMLElement>('.notice')!;
    expect(notice.textContent).toContain('concluded');
    expect(appB.announcer.assertiveRegion.textContent).toContain('concluded');

    // The resync brought app B up to date and locked its controls.
    expect(appB.view.phase).toBe('concluded');
    expect(okayB.disabled).toBe(true);

    const dismiss = notice.querySelector<HTMLButtonElement>('button:last-of-type')!;
    dismiss.click();
    expect(notice.hidden).toBe(true);
  });

  it('surfaces model failures as a retryable notice and mirrors the server transcript', async () => {
    const root = freshRoot();
    const app = await ChatApp.start(root, { baseUrl, collectionId: flakyCollectionId, fetchFn: realFetch });

    quickButton(root, 'Okay').click();
    await waitFor(() => !root.querySelector<HTMLElement>('.notice')!.hidden);

    const notice = root.querySelector<HTMLElement>('.notice')!;
    const retry = notice.querySelector<HTMLButtonElement>('button')!;
    expect(retry.hidden).toBe(false);
    expect(retry.textContent).toBe('Retry');

    // The server recorded the user turn plus an apologetic bot turn; the
    // resynced view mirrors that exactly.
    const transcript = await (await fetch(`${baseUrl}/sessions/${app.view.sessionId}/transcript`)).json();
    expect(app.view.turns.map((turn) => turn.text)).toEqual(transcript.turns.map((turn: { text: string }) => turn.text));
    expect(app.view.turns.at(-1)!.speaker).toBe('bot');

    // Retrying fails again against the permanently broken fixture but stays stable.
    retry.click();
    await waitFor(() => !root.querySelector<HTMLElement>('.notice')!.hidden);
    expect(app.view.pending).toBe(false);
  });
});

describe('baseline sessions', () => {
  it('renders replies without guidance sections', async () => {
    const root = freshRoot();
    const app = await ChatApp.start(root, { baseUrl, collectionId, engine: 'baseline', fetchFn: realFetch });
    expect(app.view.engineLabel).toBe('baseline');

    const composerInput = root.querySelector<HTMLInputElement>('.composer input')!;
    const composer = root.querySelector<HTMLFormElement>('.composer')!;
    await waitFor(() => !composerInput.disabled);
    composerInput.value = 'tell me about the beach';
    const turnsBefore = app.view.turns.length;
    composer.dispatchEvent(new Event('submit', { bubbles: true, cancelable: true }));
    await waitFor(() => !app.view.pending && app.view.turns.length > turnsBefore);

    expect(root.querySelectorAll('li.turn-bot .guidance').length).toBe(0);
    expect(app.announcer.announcedTexts().length).toBe(2); // opening + reply
  });
});
