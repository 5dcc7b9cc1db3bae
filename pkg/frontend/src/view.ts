/**
 * Pure projections from server payloads to what the chat log renders.
 * No dialogue logic lives here: the engine decided everything already,
 * the UI only splits the reply for presentation.
 */

import type { MessageResponse, TranscriptTurn } from './api.js';

export interface BubbleParts {
  /** The free-form answer to what the user said. */
  body: string;
  /** The proactive guidance portion, rendered after a visible divider. */
  guidance: string | null;
}

export interface UiTurn {
  speaker: 'user' | 'bot';
  text: string;
  guidanceKind: string | null;
  parts: BubbleParts;
}

export interface UiSessionView {
  sessionId: string;
  engineLabel: string;
  turns: UiTurn[];
  progress: { visited: number; total: number };
  phase: string;
  composing: string;
  pending: boolean;
}

/**
 * The engine concatenates the raw reply and the guidance with paragraph
 * breaks, guidance last; mirror that contract when splitting.
 */
export function splitGuidance(text: string, guidanceKind: string | null): BubbleParts {
  if (!guidanceKind || guidanceKind === 'none') {
    return { body: text, guidance: null };
  }
  const paragraphs = text.split('\n\n');
  const guidance = paragraphs.pop() ?? '';
  return { body: paragraphs.join('\n\n'), guidance };
}

export function turnFromTranscript(turn: TranscriptTurn): UiTurn {
  const guidanceKind = turn.speaker === 'bot' ? turn.annotations.guidance_kind : null;
  return {
    speaker: turn.speaker,
    text: turn.text,
    guidanceKind,
    parts: turn.speaker === 'bot' ? splitGuidance(turn.text, guidanceKind) : { body: turn.text, guidance: null },
  };
}

export function userTurn(text: string): UiTurn {
  return { speaker: 'user', text, guidanceKind: null, parts: { body: text, guidance: null } };
}

export function botTurnFromReply(reply: MessageResponse): UiTurn {
  return {
    speaker: 'bot',
    text: reply.reply,
    guidanceKind: reply.guidance_kind,
    parts: splitGuidance(reply.reply, reply.guidance_kind),
  };
}

export function progressLabel(progress: { visited: number; total: number }): string {
  return `${progress.visited} of ${progress.total}`;
}
