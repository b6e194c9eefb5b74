/** Double-tap activation for mode toggles. */

export const DOUBLE_TAP_WINDOW_MS = 400;

/**
 * Fires when the same key arrives twice within the window. A hit
 * consumes both taps, so a third press starts a fresh pair instead of
 * chaining activations.
 */
export class DoubleTapDetector {
  private lastKey: string | null = null;
  private lastTime = 0;

  constructor(private readonly windowMs: number = DOUBLE_TAP_WINDOW_MS) {}

  detect(key: string, timeMs: number): boolean {
    const hit =
      this.lastKey === key && timeMs - this.lastTime <= this.windowMs;
    if (hit) {
      this.lastKey = null;
      this.lastTime = 0;
      return true;
    }
    this.lastKey = key;
    this.lastTime = timeMs;
    return false;
  }

  reset(): void {
    this.lastKey = null;
    this.lastTime = 0;
  }
}
