import type { ApiClient } from "./api.js";
import type { ClickKind } from "./types.js";

export const CLICK_DEBOUNCE_MS = 500;

/**
 * Debounces click reports so a rapid double-click on the same item sends a
 * single POST. Failures surface through onError (non-blocking toast).
 */
export class ClickReporter {
  private pending = new Map<string, ReturnType<typeof setTimeout>>();

  constructor(
    private api: ApiClient,
    private onError: (message: string) => void = () => {},
  ) {}

  report(serpId: string, position: number, clickKind: ClickKind): void {
    const key = `${serpId}:${position}:${clickKind}`;
    const existing = this.pending.get(key);
    if (existing !== undefined) {
      clearTimeout(existing);
    }
    const timer = setTimeout(() => {
      this.pending.delete(key);
      void this.api
        .postClick(serpId, position, clickKind)
        .catch(() => this.onError("click could not be recorded"));
    }, CLICK_DEBOUNCE_MS);
    this.pending.set(key, timer);
  }
}
