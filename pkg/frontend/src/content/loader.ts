// Content scripts are classic scripts, so the real overlay (an ES
// module) is pulled in through a dynamic import against the
// extension-internal URL.
(async () => {
  const src = chrome.runtime.getURL("content/overlay.js");
  try {
    await import(src);
  } catch (err) {
    console.error("floatlab reader failed to load:", err);
  }
})();
