/**
 * ARIA live regions for screen-reader announcements.
 *
 * Each announcement appends a fresh node instead of swapping textContent,
 * so repeated texts are reliably re-announced and the region doubles as
 * an in-DOM log of what was announced (tests count those nodes to prove
 * "exactly once").
 */

export class Announcer {
  readonly politeRegion: HTMLElement;
  readonly assertiveRegion: HTMLElement;

  constructor(container: HTMLElement) {
    this.politeRegion = container.ownerDocument.createElement('div');
    this.politeRegion.className = 'sr-only';
    this.politeRegion.setAttribute('aria-live', 'polite');
    this.politeRegion.setAttribute('role', 'log');
    this.politeRegion.dataset.testid = 'live-region';

    this.assertiveRegion = container.ownerDocument.createElement('div');
    this.assertiveRegion.className = 'sr-only';
    this.assertiveRegion.setAttribute('aria-live', 'assertive');
    this.assertiveRegion.setAttribute('role', 'alert');
    this.assertiveRegion.dataset.testid = 'alert-region';

    container.append(this.politeRegion, this.assertiveRegion);
  }

  private post(region: HTMLElement, text: string): void {
    const node = region.ownerDocument.createElement('p');
    node.textContent = text;
    region.appendChild(node);
  }

  /** Announce a new bot turn or status update. */
  announce(text: string): void {
    this.post(this.politeRegion, text);
  }

  /** Announce an error or interruption that must not wait. */
  announceAssertive(text: string): void {
    this.post(this.assertiveRegion, text);
  }

  /** Texts announced so far on the polite channel, in order. */
  announcedTexts(): string[] {
    return Array.from(this.politeRegion.children, (node) => node.textContent ?? '');
  }
}
