import { describe, expect, it } from "vitest";

import {
  HoldRepeater,
  RsvpScheduler,
  WPM_MAX,
  WPM_MIN,
  clampWpm,
  makeReaderState,
  orpIndex,
  readerTransition,
  tokenizeSelection,
  wordDelayMs,
  wordLayout,
} from "../src/core/rsvp.js";
import {
  MemoryPrefs,
  WPM_PREF_KEY,
  loadWpm,
  saveWpm,
} from "../src/core/prefs.js";
import { FakeTimers } from "./faketimers.js";

describe("orpIndex", () => {
  it("anchors a single character on itself", () => {
    expect(orpIndex("a")).toBe(0);
    expect(orpIndex("I")).toBe(0);
  });

  it("uses the second character for short words", () => {
    expect(orpIndex("to")).toBe(1);
    expect(orpIndex("cat")).toBe(1);
    expect(orpIndex("house")).toBe(1);
  });

  it("shifts inward as words grow", () => {
    expect(orpIndex("bridge")).toBe(2); // 6
    expect(orpIndex("marmalade")).toBe(2); // 9
    expect(orpIndex("silhouette")).toBe(3); // 10
    expect(orpIndex("presentation")).toBe(3); // 12
    expect(orpIndex("extraordinary")).toBe(3); // 13
    expect(orpIndex("incomprehensible")).toBe(4); // 16
    expect(orpIndex("x".repeat(40))).toBe(4);
  });

  it("rejects the empty word", () => {
    expect(() => orpIndex("")).toThrow(RangeError);
  });
});

describe("wordDelayMs", () => {
  it("is 60000 / wpm", () => {
    expect(wordDelayMs(300)).toBe(200);
    expect(wordDelayMs(600)).toBe(100);
    expect(wordDelayMs(60)).toBe(1000);
  });

  it("rejects non-positive wpm", () => {
    expect(() => wordDelayMs(0)).toThrow(RangeError);
    expect(() => wordDelayMs(-120)).toThrow(RangeError);
  });
});

describe("tokenizeSelection", () => {
  it("splits on whitespace and keeps punctuation", () => {
    expect(tokenizeSelection("Hello, world.")).toEqual(["Hello,", "world."]);
  });

  it("treats newlines and runs of spaces as one separator", () => {
    expect(tokenizeSelection("a\n b")).toEqual(["a", "b"]);
    expect(tokenizeSelection("  one\t\ttwo  \n three ")).toEqual([
      "one",
      "two",
      "three",
    ]);
  });

  it("rejects selections with no words", () => {
    expect(() => tokenizeSelection("")).toThrow(RangeError);
    expect(() => tokenizeSelection("   \n\t ")).toThrow(RangeError);
  });

  it("handles a very large selection", () => {
    const text = Array.from({ length: 10000 }, (_, i) => `w${i}`).join(" ");
    const tokens = tokenizeSelection(text);
    expect(tokens).toHaveLength(10000);
    expect(tokens[9999]).toBe("w9999");
  });
});

describe("clampWpm", () => {
  it("pins to the working range", () => {
    expect(clampWpm(59)).toBe(WPM_MIN);
    expect(clampWpm(1201)).toBe(WPM_MAX);
    expect(clampWpm(300)).toBe(300);
  });
});

describe("makeReaderState", () => {
  it("opens at the first word, playing, at the requested speed", () => {
    const state = makeReaderState(["alpha", "beta"], 425);
    expect(state.index).toBe(0);
    expect(state.playing).toBe(true);
    expect(state.wpm).toBe(425);
  });

  it("clamps an out-of-range speed", () => {
    expect(makeReaderState(["x"], 9000).wpm).toBe(WPM_MAX);
  });
});

describe("readerTransition", () => {
  const words = ["one", "two", "three", "four"];
  const base = { ...makeReaderState(words, 300), index: 2 };

  it("space toggles playing and touches nothing else", () => {
    const once = readerTransition(base, " ");
    expect(once.exited).toBe(false);
    expect(once.state.playing).toBe(false);
    expect(once.state.index).toBe(2);
    expect(once.state.wpm).toBe(300);
    const twice = readerTransition(once.state, " ");
    expect(twice.state.playing).toBe(true);
  });

  it("s slows by 25 and clamps at 60", () => {
    expect(readerTransition(base, "s").state.wpm).toBe(275);
    const slow = { ...base, wpm: 70 };
    expect(readerTransition(slow, "s").state.wpm).toBe(60);
    expect(readerTransition({ ...base, wpm: 60 }, "s").state.wpm).toBe(60);
  });

  it("d speeds by 25 and clamps at 1200", () => {
    expect(readerTransition(base, "d").state.wpm).toBe(325);
    const fast = { ...base, wpm: 1190 };
    expect(readerTransition(fast, "d").state.wpm).toBe(1200);
    expect(readerTransition({ ...base, wpm: 1200 }, "d").state.wpm).toBe(1200);
  });

  it("q steps back and stops at 0", () => {
    expect(readerTransition(base, "q").state.index).toBe(1);
    const atStart = { ...base, index: 0 };
    expect(readerTransition(atStart, "q").state.index).toBe(0);
  });

  it("w steps forward and stops at words.length", () => {
    expect(readerTransition(base, "w").state.index).toBe(3);
    const atLast = { ...base, index: 3 };
    expect(readerTransition(atLast, "w").state.index).toBe(4);
    const past = { ...base, index: 4 };
    expect(readerTransition(past, "w").state.index).toBe(4);
  });

  it("letter keys are case-insensitive", () => {
    expect(readerTransition(base, "S").state.wpm).toBe(275);
    expect(readerTransition(base, "W").state.index).toBe(3);
  });

  it("escape exits, pauses, and leaves wpm for persisting", () => {
    const out = readerTransition(base, "Escape");
    expect(out.exited).toBe(true);
    expect(out.state.playing).toBe(false);
    expect(out.state.wpm).toBe(300);
  });

  it("ignores unknown keys", () => {
    for (const key of ["x", "ArrowLeft", "Enter", "1", "Shift"]) {
      const out = readerTransition(base, key);
      expect(out.exited).toBe(false);
      expect(out.state).toEqual(base);
    }
  });
});

describe("wordLayout", () => {
  it("places the left edge so the anchor hits the recognition point", () => {
    const { left } = wordLayout("cat", 300, 10);
    // slot 1.5 char widths from the left edge
    expect(left).toBe(285);
  });

  it("reports the recognition-point center at the anchor", () => {
    for (const word of ["a", "cat", "bridge", "presentation", "x".repeat(20)]) {
      const { left, orpCenterX } = wordLayout(word, 310, 13.2);
      expect(orpCenterX).toBeCloseTo(310, 9);
      expect(left).toBeLessThan(310);
    }
  });
});

describe("RsvpScheduler", () => {
  function harness(wpm: number) {
    const timers = new FakeTimers();
    const ticks: number[] = [];
    const sched = new RsvpScheduler(() => ticks.push(timers.now()), wpm, timers);
    return { timers, ticks, sched };
  }

  it("ticks at the word delay", () => {
    const { timers, ticks, sched } = harness(300);
    sched.start();
    timers.advance(200);
    expect(ticks).toEqual([200]);
    timers.advance(400);
    expect(ticks).toEqual([200, 400, 600]);
  });

  it("start is idempotent", () => {
    const { timers, ticks, sched } = harness(300);
    sched.start();
    sched.start();
    timers.advance(200);
    expect(ticks).toEqual([200]);
  });

  it("stop cancels the pending tick", () => {
    const { timers, ticks, sched } = harness(300);
    sched.start();
    timers.advance(150);
    sched.stop();
    expect(sched.running).toBe(false);
    timers.advance(5000);
    expect(ticks).toEqual([]);
  });

  it("a wpm change rebuilds the pending tick at the new delay", () => {
    const { timers, ticks, sched } = harness(300);
    sched.start();
    timers.advance(150); // nothing due yet
    sched.setWpm(600);
    timers.advance(99);
    expect(ticks).toEqual([]);
    timers.advance(1); // 100ms after the change
    expect(ticks).toEqual([250]);
    timers.advance(100);
    expect(ticks).toEqual([250, 350]);
  });

  it("stopping from inside a tick halts the chain", () => {
    const timers = new FakeTimers();
    let count = 0;
    const sched: RsvpScheduler = new RsvpScheduler(
      () => {
        count += 1;
        if (count === 3) sched.stop();
      },
      600,
      timers,
    );
    sched.start();
    timers.advance(2000);
    expect(count).toBe(3);
  });

  it("restarting after a stop resumes ticking", () => {
    const { timers, ticks, sched } = harness(300);
    sched.start();
    timers.advance(200);
    sched.stop();
    timers.advance(1000);
    sched.start();
    timers.advance(200);
    expect(ticks).toEqual([200, 1400]);
  });
});

describe("HoldRepeater", () => {
  function harness() {
    const timers = new FakeTimers();
    const fires: number[] = [];
    const hold = new HoldRepeater(() => fires.push(timers.now()), timers);
    return { timers, fires, hold };
  }

  it("stays quiet until the hold threshold", () => {
    const { timers, fires, hold } = harness();
    hold.keyDown();
    timers.advance(499);
    expect(fires).toEqual([]);
    timers.advance(1);
    expect(fires).toEqual([500]);
  });

  it("repeats at 10 per second once armed", () => {
    const { timers, fires, hold } = harness();
    hold.keyDown();
    timers.advance(800);
    expect(fires).toEqual([500, 600, 700, 800]);
  });

  it("a quick tap never fires", () => {
    const { timers, fires, hold } = harness();
    hold.keyDown();
    timers.advance(300);
    hold.keyUp();
    timers.advance(5000);
    expect(fires).toEqual([]);
  });

  it("keyUp stops an active repeat", () => {
    const { timers, fires, hold } = harness();
    hold.keyDown();
    timers.advance(700);
    hold.keyUp();
    timers.advance(5000);
    expect(fires).toEqual([500, 600, 700]);
  });

  it("OS auto-repeat keydowns while held are ignored", () => {
    const { timers, fires, hold } = harness();
    hold.keyDown();
    timers.advance(100);
    hold.keyDown();
    hold.keyDown();
    timers.advance(500);
    expect(fires).toEqual([500, 600]);
  });

  it("can be held again after release", () => {
    const { timers, fires, hold } = harness();
    hold.keyDown();
    timers.advance(500);
    hold.keyUp();
    timers.advance(100);
    hold.keyDown();
    timers.advance(500);
    expect(fires).toEqual([500, 1100]);
  });
});

describe("preferences", () => {
  it("uses the expected storage key", () => {
    expect(WPM_PREF_KEY).toBe("floatlab.wpm");
  });

  it("round-trips wpm through the store", async () => {
    const store = new MemoryPrefs();
    await saveWpm(store, 425);
    expect(await loadWpm(store)).toBe(425);
  });

  it("defaults to 300 when nothing is stored", async () => {
    expect(await loadWpm(new MemoryPrefs())).toBe(300);
  });

  it("clamps stored values into the working range", async () => {
    const store = new MemoryPrefs();
    await store.set(WPM_PREF_KEY, 5000);
    expect(await loadWpm(store)).toBe(1200);
    await store.set(WPM_PREF_KEY, 3);
    expect(await loadWpm(store)).toBe(60);
  });

  it("falls back to the default on junk values", async () => {
    const store = new MemoryPrefs();
    for (const junk of ["fast", null, Number.NaN, { wpm: 300 }, Infinity]) {
      await store.set(WPM_PREF_KEY, junk);
      expect(await loadWpm(store)).toBe(300);
    }
  });

  it("clamps on save too", async () => {
    const store = new MemoryPrefs();
    await saveWpm(store, 30);
    expect(await store.get(WPM_PREF_KEY)).toBe(60);
  });
});
