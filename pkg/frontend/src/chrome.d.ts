/** The slice of the extension API this package touches. */

declare namespace chrome {
  const runtime: {
    getURL(path: string): string;
    onInstalled: {
      addListener(fn: () => void): void;
    };
  };

  const storage: {
    local: {
      get(keys: string | string[]): Promise<Record<string, unknown>>;
      set(items: Record<string, unknown>): Promise<void>;
    };
  };
}
