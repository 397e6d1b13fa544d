import type { ClickKind, MemberSummary, SearchResponse } from "./types.js";

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  async search(query: string, memberId: string, signal?: AbortSignal): Promise<SearchResponse> {
    const url = `${this.baseUrl}/search?q=${encodeURIComponent(query)}&member=${encodeURIComponent(memberId)}`;
    const res = await fetch(url, { signal });
    if (!res.ok) {
      throw new Error(`search failed: HTTP ${res.status}`);
    }
    return (await res.json()) as SearchResponse;
  }

  /** POST one click event; retries once on network failure. */
  async postClick(serpId: string, position: number, clickKind: ClickKind): Promise<void> {
    const body = JSON.stringify({ serp_id: serpId, position, click_kind: clickKind });
    const attempt = () =>
      fetch(`${this.baseUrl}/click`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body,
      });
    try {
      await attempt();
    } catch {
      await attempt(); // single retry, then the caller's toast handles it
    }
  }

  async members(): Promise<MemberSummary[]> {
    const res = await fetch(`${this.baseUrl}/members`);
    if (!res.ok) {
      throw new Error(`members failed: HTTP ${res.status}`);
    }
    const data = await res.json();
    return data.members as MemberSummary[];
  }
}
