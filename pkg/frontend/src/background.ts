// All behavior lives in the content script; the worker exists so the
// extension has a lifecycle owner and a place to grow settings sync.
chrome.runtime.onInstalled.addListener(() => {
  // nothing to migrate yet
});
