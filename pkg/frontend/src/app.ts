/**
 * The chat client: renders the conversation, announces new bot turns via
 * an assistive live region, shows scene progress, and offers keyboard-
 * first quick actions for the engine's natural-language commands.
 *
 * All state is a projection of server responses; the client never
 * classifies inputs or tracks scenes itself. One request is in flight at
 * a time and the controls disable while it is (mirroring the server's
 * one-turn-per-session contract).
 */

import { ApiError, SessionApi } from './api.js';
import type { FetchLike, MessageResponse } from './api.js';
import { Announcer } from './announcer.js';
import { botTurnFromReply, progressLabel, turnFromTranscript, userTurn } from './view.js';
import type { UiSessionView, UiTurn } from './view.js';

export interface MountOptions {
  baseUrl: string;
  fetchFn?: FetchLike;
}

export interface StartOptions extends MountOptions {
  collectionId: string;
  engine?: 'reviver' | 'baseline';
}

export interface ResumeOptions extends MountOptions {
  sessionId: string;
}

const QUICK_COMMANDS = ['Okay', 'Go on', 'Next scene'] as const;
const SWITCH_PREFIX = "Let's talk about";

interface RetryInfo {
  text: string;
  /** The optimistic user turn is still rendered; resending must not add another. */
  optimisticRendered: boolean;
}

export class ChatApp {
  readonly root: HTMLElement;
  readonly api: SessionApi;
  readonly announcer: Announcer;
  view: UiSessionView;

  private logElement!: HTMLUListElement;
  private progressElement!: HTMLElement;
  private noticeBox!: HTMLElement;
  private noticeText!: HTMLElement;
  private retryButton!: HTMLButtonElement;
  private dismissButton!: HTMLButtonElement;
  private quickButtons: HTMLButtonElement[] = [];
  private switchForm!: HTMLFormElement;
  private switchInput!: HTMLInputElement;
  private switchButton!: HTMLButtonElement;
  private composerForm!: HTMLFormElement;
  private composerInput!: HTMLInputElement;
  private sendButton!: HTMLButtonElement;

  private retryInfo: RetryInfo | null = null;
  private lastFocused: HTMLElement | null = null;

  private constructor(root: HTMLElement, api: SessionApi, view: UiSessionView) {
    this.root = root;
    this.api = api;
    this.view = view;
    this.buildDom();
    this.announcer = new Announcer(this.root);
    this.renderAll();
  }

  /** Open a brand-new session; the opening bot turn is announced. */
  static async start(root: HTMLElement, options: StartOptions): Promise<ChatApp> {
    const api = new SessionApi(options.baseUrl, options.fetchFn);
    const engine = options.engine ?? 'reviver';
    const created = await api.createSession(options.collectionId, engine);
    const app = await ChatApp.fromServer(root, api, created.session_id);
    const opening = app.view.turns.find((turn) => turn.speaker === 'bot');
    if (opening) {
      app.announcer.announce(opening.text);
    }
    return app;
  }

  /** Reattach to an existing session; nothing old is re-announced. */
  static async resume(root: HTMLElement, options: ResumeOptions): Promise<ChatApp> {
    const api = new SessionApi(options.baseUrl, options.fetchFn);
    return ChatApp.fromServer(root, api, options.sessionId);
  }

  private static async fromServer(root: HTMLElement, api: SessionApi, sessionId: string): Promise<ChatApp> {
    const [transcript, state] = await Promise.all([api.getTranscript(sessionId), api.getState(sessionId)]);
    const view: UiSessionView = {
      sessionId,
      engineLabel: state.engine,
      turns: transcript.turns.map(turnFromTranscript),
      progress: state.progress,
      phase: state.phase,
      composing: '',
      pending: false,
    };
    return new ChatApp(root, api, view);
  }

  // -- DOM ------------------------------------------------------------------

  private buildDom(): void {
    const doc = this.root.ownerDocument;
    this.root.classList.add('chat-app');
    this.root.innerHTML = '';

    const header = doc.createElement('header');
    const title = doc.createElement('h1');
    title.textContent = 'Photo reminiscence chat';
    const engineBadge = doc.createElement('p');
    engineBadge.className = 'engine-label';
    engineBadge.textContent = `Engine: ${this.view.engineLabel}`;
    const progressLine = doc.createElement('p');
    progressLine.append('Scene progress: ');
    this.progressElement = doc.createElement('span');
    this.progressElement.dataset.testid = 'progress';
    progressLine.appendChild(this.progressElement);
    header.append(title, engineBadge, progressLine);

    this.logElement = doc.createElement('ul');
    this.logElement.className = 'chat-log';
    this.logElement.setAttribute('aria-label', 'Conversation');

    this.noticeBox = doc.createElement('div');
    this.noticeBox.className = 'notice';
    this.noticeBox.hidden = true;
    this.noticeText = doc.createElement('p');
    this.retryButton = doc.createElement('button');
    this.retryButton.type = 'button';
    this.retryButton.textContent = 'Retry';
    this.retryButton.addEventListener('click', () => void this.retry());
    this.dismissButton = doc.createElement('button');
    this.dismissButton.type = 'button';
    this.dismissButton.textContent = 'Dismiss';
    this.dismissButton.addEventListener('click', () => this.dismissNotice());
    this.noticeBox.append(this.noticeText, this.retryButton, this.dismissButton);

    const quick = doc.createElement('section');
    quick.className = 'quick-actions';
    quick.setAttribute('aria-label', 'Quick actions');
    for (const command of QUICK_COMMANDS) {
      const button = doc.createElement('button');
      button.type = 'button';
      button.dataset.command = command;
      button.textContent = command;
      button.addEventListener('click', () => void this.send(command));
      this.quickButtons.push(button);
      quick.appendChild(button);
    }
    this.switchForm = doc.createElement('form');
    this.switchForm.className = 'switch-form';
    const switchLabel = doc.createElement('label');
    switchLabel.textContent = `${SWITCH_PREFIX} `;
    this.switchInput = doc.createElement('input');
    this.switchInput.name = 'keyword';
    this.switchInput.type = 'text';
    this.switchInput.setAttribute('aria-label', 'Scene to switch to');
    switchLabel.appendChild(this.switchInput);
    this.switchButton = doc.createElement('button');
    this.switchButton.type = 'submit';
    this.switchButton.textContent = 'Switch scene';
    this.switchForm.append(switchLabel, this.switchButton);
    this.switchForm.addEventListener('submit', (event) => {
      event.preventDefault();
      const keyword = this.switchInput.value.trim();
      if (keyword) {
        this.switchInput.value = '';
        void this.send(`${SWITCH_PREFIX} ${keyword}`);
      }
    });
    quick.appendChild(this.switchForm);

    this.composerForm = doc.createElement('form');
    this.composerForm.className = 'composer';
    const composerLabel = doc.createElement('label');
    composerLabel.textContent = 'Your message ';
    this.composerInput = doc.createElement('input');
    this.composerInput.type = 'text';
    this.composerInput.name = 'message';
    composerLabel.appendChild(this.composerInput);
    this.sendButton = doc.createElement('button');
    this.sendButton.type = 'submit';
    this.sendButton.textContent = 'Send';
    this.composerForm.append(composerLabel, this.sendButton);
    this.composerForm.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = this.composerInput.value;
      if (text.trim()) {
        this.composerInput.value = '';
        void this.send(text);
      }
    });

    this.root.append(header, this.logElement, this.noticeBox, quick, this.composerForm);
  }

  private renderAll(): void {
    this.logElement.innerHTML = '';
    for (const turn of this.view.turns) {
      this.logElement.appendChild(this.renderTurn(turn));
    }
    this.renderProgress();
    this.updateControls();
  }

  private renderTurn(turn: UiTurn): HTMLLIElement {
    const doc = this.root.ownerDocument;
    const item = doc.createElement('li');
    item.className = `turn turn-${turn.speaker}`;
    item.dataset.speaker = turn.speaker;
    const who = doc.createElement('span');
    who.className = 'sr-only';
    who.textContent = turn.speaker === 'bot' ? 'Bot: ' : 'You: ';
    item.appendChild(who);
    if (turn.parts.body) {
      const body = doc.createElement('p');
      body.className = 'bubble-body';
      body.textContent = turn.parts.body;
      item.appendChild(body);
    }
    if (turn.parts.guidance !== null) {
      // Same bubble, after a visible divider: the guidance is part of the
      // reply but distinguishable for the eye and the screen reader alike.
      item.appendChild(doc.createElement('hr'));
      const guidance = doc.createElement('p');
      guidance.className = 'guidance';
      guidance.setAttribute('role', 'note');
      guidance.setAttribute('aria-label', 'Guide suggestion');
      guidance.textContent = turn.parts.guidance;
      item.appendChild(guidance);
    }
    return item;
  }

  private appendTurn(turn: UiTurn): void {
    this.view.turns.push(turn);
    this.logElement.appendChild(this.renderTurn(turn));
  }

  private renderProgress(): void {
    this.progressElement.textContent = progressLabel(this.view.progress);
  }

  private updateControls(): void {
    const locked = this.view.pending || this.view.phase === 'concluded';
    for (const button of this.quickButtons) {
      button.disabled = locked;
    }
    this.switchInput.disabled = locked;
    this.switchButton.disabled = locked;
    this.composerInput.disabled = locked;
    this.sendButton.disabled = locked;
    if (!locked && this.lastFocused && this.root.ownerDocument.activeElement === this.root.ownerDocument.body) {
      // Re-enabling after an in-flight turn: give focus back instead of
      // letting it fall to the document body.
      this.lastFocused.focus();
    }
  }

  // -- messaging ---------------------------------------------------------------

  /** Send one user message; resolves when the round trip settles. */
  async send(text: string, options: { reuseOptimisticTurn?: boolean } = {}): Promise<void> {
    if (this.view.pending || this.view.phase === 'concluded') {
      return;
    }
    this.view.pending = true;
    this.lastFocused = (this.root.ownerDocument.activeElement as HTMLElement | null) ?? null;
    this.updateControls();
    if (!options.reuseOptimisticTurn) {
      this.appendTurn(userTurn(text));
    }
    try {
      const reply = await this.api.sendMessage(this.view.sessionId, text);
      this.retryInfo = null;
      this.acceptReply(reply);
    } catch (error) {
      await this.handleSendError(error, text);
    } finally {
      this.view.pending = false;
      this.updateControls();
    }
  }

  private acceptReply(reply: MessageResponse): void {
    const turn = botTurnFromReply(reply);
    this.appendTurn(turn);
    this.announcer.announce(turn.text);
    this.view.progress = reply.progress;
    this.view.phase = reply.phase;
    this.renderProgress();
  }

  private async handleSendError(error: unknown, text: string): Promise<void> {
    if (error instanceof ApiError) {
      // The server is the source of truth for what actually got recorded
      // (a 502 reply leaves a user turn plus an apology in the history; a
      // refused turn leaves nothing), so re-project from the transcript.
      await this.resync();
      if (error.concluded) {
        this.showNotice('The conversation has concluded.', null);
      } else if (error.status === 502) {
        this.showNotice('The reply failed on the model side. Retry sends the same message again.', {
          text,
          optimisticRendered: false,
        });
      } else if (error.retryable) {
        this.showNotice('Another turn is still being processed. Retry in a moment.', {
          text,
          optimisticRendered: false,
        });
      } else {
        this.showNotice(`The request was rejected (${error.status}).`, null);
      }
      return;
    }
    // Network failure: the server may never have seen the message. Keep the
    // optimistic turn and let Retry resend the identical text, without
    // rendering a duplicate user turn.
    this.showNotice('Could not reach the server. Retry to resend your message.', {
      text,
      optimisticRendered: true,
    });
  }

  private async resync(): Promise<void> {
    const [transcript, state] = await Promise.all([
      this.api.getTranscript(this.view.sessionId),
      this.api.getState(this.view.sessionId),
    ]);
    this.view.turns = transcript.turns.map(turnFromTranscript);
    this.view.progress = state.progress;
    this.view.phase = state.phase;
    this.renderAll();
  }

  /** Resend the message from the last failed turn. */
  async retry(): Promise<void> {
    const info = this.retryInfo;
    if (!info) {
      return;
    }
    this.dismissNotice();
    this.retryInfo = null;
    await this.send(info.text, { reuseOptimisticTurn: info.optimisticRendered });
  }

  dismissNotice(): void {
    this.noticeBox.hidden = true;
  }

  private showNotice(message: string, retry: RetryInfo | null): void {
    this.retryInfo = retry;
    this.noticeText.textContent = message;
    this.retryButton.hidden = retry === null;
    this.noticeBox.hidden = false;
    this.announcer.announceAssertive(message);
  }
}
