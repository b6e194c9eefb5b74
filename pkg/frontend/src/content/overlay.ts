/**
 * Page overlay: double-tap r starts RSVP reading of the current
 * selection, double-tap p grabs the page for pointer-lock pan/zoom.
 *
 * The page itself is never edited. Everything visible lives in one
 * container appended to the root element (not body, so the pan
 * transform cannot drag the overlay along), and pan mode touches only
 * document.body's transform, restored verbatim on exit.
 */

import {
  DEFAULT_WPM,
  HoldRepeater,
  ReaderState,
  RsvpScheduler,
  makeReaderState,
  orpIndex,
  readerTransition,
  tokenizeSelection,
  wordLayout,
} from "../core/rsvp.js";
import {
  PanState,
  TransformSnapshot,
  Vec2,
  makePanState,
  panBy,
  panTransform,
  panStep,
  restoreTransform,
  snapshotTransform,
  zoomStep,
} from "../core/pan.js";
import { DoubleTapDetector } from "../core/doubletap.js";
import { defaultPrefsStore, loadWpm, saveWpm } from "../core/prefs.js";

type Mode = "idle" | "reading" | "panning";

const MODAL_WIDTH = 620;
const MODAL_HEIGHT = 150;
const FONT_SIZE_PX = 34;

const prefs = defaultPrefsStore();
const taps = new DoubleTapDetector();

let mode: Mode = "idle";

// ---------------------------------------------------------------- overlay root

const root = document.createElement("div");
root.id = "floatlab-reader-root";
root.style.cssText =
  "position:fixed;inset:0;z-index:2147483647;pointer-events:none;";
document.documentElement.appendChild(root);

function notice(text: string): void {
  const el = document.createElement("div");
  el.textContent = text;
  el.style.cssText =
    "position:fixed;left:50%;bottom:12%;transform:translateX(-50%);" +
    "background:#222;color:#eee;padding:8px 16px;border-radius:6px;" +
    "font:14px system-ui,sans-serif;opacity:0.95;";
  root.appendChild(el);
  setTimeout(() => el.remove(), 1600);
}

// ---------------------------------------------------------------- reading mode

let reader: ReaderState = makeReaderState([]);
let scheduler: RsvpScheduler | null = null;
let holdQ: HoldRepeater | null = null;
let holdW: HoldRepeater | null = null;

let backdrop: HTMLDivElement | null = null;
let wordBox: HTMLDivElement | null = null;
let statusBox: HTMLDivElement | null = null;
let charWidthPx = 0;

function buildModal(): void {
  backdrop = document.createElement("div");
  backdrop.style.cssText =
    "position:fixed;inset:0;background:rgba(0,0,0,0.55);pointer-events:auto;";

  const modal = document.createElement("div");
  modal.style.cssText =
    `position:fixed;left:50%;top:38%;width:${MODAL_WIDTH}px;` +
    `height:${MODAL_HEIGHT}px;margin-left:${-MODAL_WIDTH / 2}px;` +
    "background:#faf8f4;border-radius:10px;box-shadow:0 12px 40px rgba(0,0,0,0.4);" +
    "overflow:hidden;";

  // vertical guide at the anchor; the ORP letter sits on this line
  const guide = document.createElement("div");
  guide.style.cssText =
    `position:absolute;left:${MODAL_WIDTH / 2}px;top:12px;bottom:34px;` +
    "width:1px;background:rgba(0,0,0,0.18);";

  wordBox = document.createElement("div");
  wordBox.style.cssText =
    `position:absolute;top:0;height:${MODAL_HEIGHT - 34}px;left:0;right:0;` +
    `font:${FONT_SIZE_PX}px/1 "DejaVu Sans Mono",Menlo,Consolas,monospace;` +
    "color:#1a1a1a;";

  statusBox = document.createElement("div");
  statusBox.style.cssText =
    "position:absolute;left:0;right:0;bottom:0;height:30px;" +
    "font:13px/30px system-ui,sans-serif;color:#666;text-align:center;";

  modal.appendChild(guide);
  modal.appendChild(wordBox);
  modal.appendChild(statusBox);
  backdrop.appendChild(modal);
  root.appendChild(backdrop);

  // monospace advance width, measured once per modal build
  const probe = document.createElement("span");
  probe.textContent = "M".repeat(40);
  probe.style.cssText = "visibility:hidden;white-space:pre;";
  wordBox.appendChild(probe);
  charWidthPx = probe.getBoundingClientRect().width / 40 || FONT_SIZE_PX * 0.6;
  probe.remove();
}

function renderWord(): void {
  if (wordBox === null) return;
  const shown = Math.min(reader.index, reader.words.length - 1);
  const word = reader.words[shown] ?? "";
  wordBox.textContent = "";
  if (word.length === 0) return;

  const orp = orpIndex(word);
  const layout = wordLayout(word, MODAL_WIDTH / 2, charWidthPx);

  const line = document.createElement("div");
  line.style.cssText = `position:absolute;left:${layout.left}px;top:42px;white-space:pre;`;

  const pre = document.createElement("span");
  pre.textContent = word.slice(0, orp);
  const mid = document.createElement("span");
  mid.textContent = word[orp] ?? "";
  mid.style.color = reader.orpHighlight;
  const post = document.createElement("span");
  post.textContent = word.slice(orp + 1);

  line.appendChild(pre);
  line.appendChild(mid);
  line.appendChild(post);
  wordBox.appendChild(line);
  renderStatus();
}

function renderStatus(): void {
  if (statusBox === null) return;
  const shown = Math.min(reader.index, reader.words.length - 1);
  const paused = reader.playing ? "" : "  paused";
  statusBox.textContent = `${reader.wpm} wpm   ${shown + 1}/${reader.words.length}${paused}`;
}

function applyTransition(key: string): void {
  const before = reader;
  const { state, exited } = readerTransition(reader, key);
  reader = state;
  if (exited) {
    exitReading();
    return;
  }
  if (scheduler !== null) {
    if (state.wpm !== before.wpm) scheduler.setWpm(state.wpm);
    if (state.playing !== before.playing) {
      if (state.playing) scheduler.start();
      else scheduler.stop();
    }
  }
  renderWord();
}

function tick(): void {
  if (reader.index < reader.words.length - 1) {
    reader = { ...reader, index: reader.index + 1 };
    renderWord();
  } else {
    // ran off the end: hold the last word and pause
    reader = { ...reader, playing: false };
    scheduler?.stop();
    renderStatus();
  }
}

async function enterReading(words: string[]): Promise<void> {
  mode = "reading";
  const wpm = await loadWpm(prefs).catch(() => DEFAULT_WPM);
  reader = makeReaderState(words, wpm);
  buildModal();
  scheduler = new RsvpScheduler(tick, reader.wpm);
  holdQ = new HoldRepeater(() => applyTransition("q"));
  holdW = new HoldRepeater(() => applyTransition("w"));
  renderWord();
  scheduler.start();
}

function exitReading(): void {
  scheduler?.stop();
  scheduler = null;
  holdQ?.keyUp();
  holdW?.keyUp();
  holdQ = null;
  holdW = null;
  backdrop?.remove();
  backdrop = null;
  wordBox = null;
  statusBox = null;
  mode = "idle";
  taps.reset();
  void saveWpm(prefs, reader.wpm).catch(() => undefined);
}

// ---------------------------------------------------------------- panning mode

let pan: PanState = makePanState();
let crosshair: HTMLDivElement | null = null;
let rafId: number | null = null;
let savedBodyStyle: TransformSnapshot = { transform: "", transformOrigin: "" };
// crosshair position in body-layout coordinates, fixed while locked
let lockCenter: Vec2 = { x: 0, y: 0 };

function enterPanning(): void {
  mode = "panning";
  pan = makePanState();
  savedBodyStyle = snapshotTransform(document.body.style);
  document.body.style.transformOrigin = "0 0";
  lockCenter = {
    x: window.scrollX + window.innerWidth / 2,
    y: window.scrollY + window.innerHeight / 2,
  };

  crosshair = document.createElement("div");
  crosshair.style.cssText =
    "position:fixed;left:50%;top:50%;width:22px;height:22px;" +
    "margin:-11px 0 0 -11px;border:2px solid rgba(220,60,40,0.9);" +
    "border-radius:50%;box-shadow:0 0 0 1px rgba(255,255,255,0.6);";
  root.appendChild(crosshair);

  document.documentElement.requestPointerLock();
  rafId = requestAnimationFrame(panFrame);
}

function exitPanning(): void {
  if (rafId !== null) {
    cancelAnimationFrame(rafId);
    rafId = null;
  }
  crosshair?.remove();
  crosshair = null;
  restoreTransform(document.body.style, savedBodyStyle);
  mode = "idle";
  taps.reset();
}

function panFrame(): void {
  panStep(pan);
  document.body.style.transform = panTransform(pan);
  rafId = requestAnimationFrame(panFrame);
}

function onPointerLockChange(): void {
  // covers both our Esc handler and the browser's own Esc release
  if (document.pointerLockElement === null && mode === "panning") {
    exitPanning();
  }
}

function onMouseMove(event: MouseEvent): void {
  if (mode !== "panning") return;
  panBy(pan, { x: event.movementX, y: event.movementY });
}

function onWheel(event: WheelEvent): void {
  if (mode !== "panning") return;
  event.preventDefault();
  zoomStep(pan, event.deltaY < 0 ? 1 : -1, lockCenter);
}

// ---------------------------------------------------------------- key routing

function isEditable(target: EventTarget | null): boolean {
  if (!(target instanceof HTMLElement)) return false;
  if (target.isContentEditable) return true;
  const tag = target.tagName;
  return tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT";
}

function consume(event: KeyboardEvent): void {
  event.preventDefault();
  event.stopPropagation();
}

function onKeyDownIdle(event: KeyboardEvent): void {
  if (event.ctrlKey || event.metaKey || event.altKey || event.repeat) return;
  if (isEditable(event.target)) return;
  const key = event.key.toLowerCase();
  if (key !== "r" && key !== "p") return;
  if (!taps.detect(key, performance.now())) return;

  consume(event);
  if (key === "p") {
    enterPanning();
    return;
  }
  const text = window.getSelection()?.toString() ?? "";
  let words: string[];
  try {
    words = tokenizeSelection(text);
  } catch {
    notice("Select some text, then double-tap r to read it");
    return;
  }
  void enterReading(words);
}

const READER_KEYS = new Set(["s", "d", "q", "w", " ", "Escape"]);

function onKeyDownReading(event: KeyboardEvent): void {
  const key = event.key.length === 1 ? event.key.toLowerCase() : event.key;
  if (!READER_KEYS.has(key)) return;
  consume(event);
  if (key === "q" || key === "w") {
    if (event.repeat) return; // repeats come from the hold timers instead
    applyTransition(key);
    (key === "q" ? holdQ : holdW)?.keyDown();
    return;
  }
  if (event.repeat) return;
  applyTransition(key);
}

function onKeyDown(event: KeyboardEvent): void {
  switch (mode) {
    case "idle":
      onKeyDownIdle(event);
      break;
    case "reading":
      onKeyDownReading(event);
      break;
    case "panning":
      if (event.key === "Escape") {
        consume(event);
        document.exitPointerLock();
      }
      break;
  }
}

function onKeyUp(event: KeyboardEvent): void {
  if (mode !== "reading") return;
  const key = event.key.length === 1 ? event.key.toLowerCase() : event.key;
  if (key === "q") holdQ?.keyUp();
  if (key === "w") holdW?.keyUp();
}

document.addEventListener("keydown", onKeyDown, true);
document.addEventListener("keyup", onKeyUp, true);
document.addEventListener("pointerlockchange", onPointerLockChange, true);
document.addEventListener("mousemove", onMouseMove, true);
document.addEventListener("wheel", onWheel, { capture: true, passive: false });

export {};
