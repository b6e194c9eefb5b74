/** RSVP reader core: pure state transitions, no DOM. */

export const WPM_MIN = 60;
export const WPM_MAX = 1200;
export const WPM_STEP = 25;
export const DEFAULT_WPM = 300;
export const DEFAULT_ORP_COLOR = "#c0392b";

// held Q/W: first repeat after the hold threshold, then a fixed rate
export const HOLD_REPEAT_DELAY_MS = 500;
export const HOLD_REPEAT_RATE_PER_S = 10;

export interface ReaderState {
  readonly words: readonly string[];
  /** 0..words.length; words.length means "ran off the end". */
  readonly index: number;
  readonly wpm: number;
  readonly playing: boolean;
  readonly orpHighlight: string;
}

export function makeReaderState(
  words: readonly string[],
  wpm: number = DEFAULT_WPM,
): ReaderState {
  return {
    words,
    index: 0,
    wpm: clampWpm(wpm),
    playing: true,
    orpHighlight: DEFAULT_ORP_COLOR,
  };
}

export function clampWpm(wpm: number): number {
  return Math.min(WPM_MAX, Math.max(WPM_MIN, wpm));
}

/**
 * Optimal recognition point of a word, as a 0-based character index.
 * Shifts inward with length: 1 char anchors on itself, short words on
 * the second character, and so on up to a cap of the fifth.
 */
export function orpIndex(word: string): number {
  if (word.length === 0) {
    throw new RangeError("orpIndex: empty word");
  }
  const n = word.length;
  if (n === 1) return 0;
  if (n <= 5) return 1;
  if (n <= 9) return 2;
  if (n <= 13) return 3;
  return 4;
}

export function wordDelayMs(wpm: number): number {
  if (wpm <= 0) {
    throw new RangeError("wordDelayMs: wpm must be > 0");
  }
  return 60000 / wpm;
}

/**
 * Horizontal layout of one word in the modal, in pixels.
 *
 * The font is monospace, so the word's left edge is placed where the
 * ORP character's center lands exactly on the anchor; the returned
 * orpCenterX is therefore the anchor for every word.
 */
export function wordLayout(
  word: string,
  anchorX: number,
  charWidthPx: number,
): { left: number; orpCenterX: number } {
  const slot = orpIndex(word) + 0.5;
  const left = anchorX - slot * charWidthPx;
  return { left, orpCenterX: left + slot * charWidthPx };
}

/** Whitespace-split tokens, punctuation kept attached for display. */
export function tokenizeSelection(text: string): string[] {
  const tokens = text.split(/\s+/).filter((t) => t.length > 0);
  if (tokens.length === 0) {
    throw new RangeError("tokenizeSelection: empty selection");
  }
  return tokens;
}

export interface TransitionResult {
  readonly state: ReaderState;
  /** true when the event asked to leave the reader (caller persists wpm) */
  readonly exited: boolean;
}

/**
 * One key event against the reader. Unknown keys are ignored; letter
 * keys are case-insensitive.
 */
export function readerTransition(
  state: ReaderState,
  key: string,
): TransitionResult {
  const k = key.length === 1 ? key.toLowerCase() : key;
  switch (k) {
    case "s":
      return { state: { ...state, wpm: clampWpm(state.wpm - WPM_STEP) }, exited: false };
    case "d":
      return { state: { ...state, wpm: clampWpm(state.wpm + WPM_STEP) }, exited: false };
    case "q":
      return { state: { ...state, index: Math.max(0, state.index - 1) }, exited: false };
    case "w":
      return {
        state: { ...state, index: Math.min(state.words.length, state.index + 1) },
        exited: false,
      };
    case " ":
      return { state: { ...state, playing: !state.playing }, exited: false };
    case "Escape":
      return { state: { ...state, playing: false }, exited: true };
    default:
      return { state, exited: false };
  }
}

/** Injectable timers so schedulers are testable against a fake clock. */
export interface TimerApi {
  set(fn: () => void, ms: number): number;
  clear(id: number): void;
  now(): number;
}

export const realTimers: TimerApi = {
  set: (fn, ms) => setTimeout(fn, ms) as unknown as number,
  clear: (id) => clearTimeout(id),
  now: () => performance.now(),
};

/**
 * Word pacing as a timer chain: each tick schedules the next one, and
 * a wpm change tears the pending tick down and rebuilds it at the new
 * delay.
 */
export class RsvpScheduler {
  private pending: number | null = null;
  private active = false;
  private wpm: number;

  constructor(
    private readonly onTick: () => void,
    wpm: number,
    private readonly timers: TimerApi = realTimers,
  ) {
    this.wpm = clampWpm(wpm);
  }

  start(): void {
    if (!this.active) {
      this.active = true;
      this.scheduleNext();
    }
  }

  stop(): void {
    this.active = false;
    if (this.pending !== null) {
      this.timers.clear(this.pending);
      this.pending = null;
    }
  }

  get running(): boolean {
    return this.active;
  }

  /** Takes effect immediately: the pending tick is rebuilt at the new delay. */
  setWpm(wpm: number): void {
    this.wpm = clampWpm(wpm);
    if (this.active && this.pending !== null) {
      this.timers.clear(this.pending);
      this.scheduleNext();
    }
  }

  private scheduleNext(): void {
    this.pending = this.timers.set(() => {
      this.pending = null;
      this.onTick();
      // onTick may stop() or reschedule through setWpm; only continue
      // the chain if it did neither
      if (this.active && this.pending === null) {
        this.scheduleNext();
      }
    }, wordDelayMs(this.wpm));
  }
}

/**
 * Hold-to-accelerate for Q/W: the keydown itself steps once (handled
 * by the caller); holding past the threshold repeats the step at a
 * fixed rate until keyup.
 */
export class HoldRepeater {
  private armTimer: number | null = null;
  private repeatTimer: number | null = null;

  constructor(
    private readonly fire: () => void,
    private readonly timers: TimerApi = realTimers,
    private readonly delayMs: number = HOLD_REPEAT_DELAY_MS,
    private readonly ratePerS: number = HOLD_REPEAT_RATE_PER_S,
  ) {}

  keyDown(): void {
    if (this.armTimer !== null || this.repeatTimer !== null) {
      return; // OS key-repeat events while already held
    }
    this.armTimer = this.timers.set(() => {
      this.armTimer = null;
      this.fire();
      this.startRepeat();
    }, this.delayMs);
  }

  keyUp(): void {
    if (this.armTimer !== null) {
      this.timers.clear(this.armTimer);
      this.armTimer = null;
    }
    if (this.repeatTimer !== null) {
      this.timers.clear(this.repeatTimer);
      this.repeatTimer = null;
    }
  }

  private startRepeat(): void {
    this.repeatTimer = this.timers.set(() => {
      this.fire();
      this.startRepeat();
    }, 1000 / this.ratePerS);
  }
}
