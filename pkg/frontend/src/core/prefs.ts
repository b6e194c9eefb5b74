/** Persisted reader preferences. */

import { clampWpm, DEFAULT_WPM } from "./rsvp.js";

export const WPM_PREF_KEY = "floatlab.wpm";

export interface PrefsStore {
  get(key: string): Promise<unknown>;
  set(key: string, value: unknown): Promise<void>;
}

/** In-memory store for tests and non-extension contexts. */
export class MemoryPrefs implements PrefsStore {
  private readonly data = new Map<string, unknown>();

  async get(key: string): Promise<unknown> {
    return this.data.get(key);
  }

  async set(key: string, value: unknown): Promise<void> {
    this.data.set(key, value);
  }
}

class ChromeLocalPrefs implements PrefsStore {
  async get(key: string): Promise<unknown> {
    const items = await chrome.storage.local.get(key);
    return items[key];
  }

  async set(key: string, value: unknown): Promise<void> {
    await chrome.storage.local.set({ [key]: value });
  }
}

export function defaultPrefsStore(): PrefsStore {
  const hasChromeStorage =
    typeof chrome !== "undefined" && chrome.storage?.local !== undefined;
  return hasChromeStorage ? new ChromeLocalPrefs() : new MemoryPrefs();
}

/** Stored wpm, clamped; the default when absent or unusable. */
export async function loadWpm(store: PrefsStore): Promise<number> {
  const raw = await store.get(WPM_PREF_KEY);
  if (typeof raw !== "number" || !Number.isFinite(raw)) {
    return DEFAULT_WPM;
  }
  return clampWpm(raw);
}

export async function saveWpm(store: PrefsStore, wpm: number): Promise<void> {
  await store.set(WPM_PREF_KEY, clampWpm(wpm));
}
