import { ApiClient } from "./api.js";
import { ClickReporter } from "./clicks.js";
import { renderSerp, showToast } from "./render.js";
import type { MemberSummary } from "./types.js";

export interface AppElements {
  form: HTMLFormElement;
  queryInput: HTMLInputElement;
  memberSelect: HTMLSelectElement;
  intentBadges: HTMLElement;
  results: HTMLElement;
}

export class App {
  private reporter: ClickReporter;
  private currentSerpId: string | null = null;
  private searchSeq = 0;
  private membersById = new Map<string, MemberSummary>();

  constructor(
    private els: AppElements,
    private api: ApiClient = new ApiClient(),
  ) {
    this.reporter = new ClickReporter(api, showToast);
    els.form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.runSearch();
    });
    els.memberSelect.addEventListener("change", () => {
      this.showIntents();
      if (this.els.queryInput.value.trim() !== "") {
        void this.runSearch();
      }
    });
  }

  async init(): Promise<void> {
    let members: MemberSummary[] = [];
    try {
      members = await this.api.members();
    } catch {
      showToast("could not load members");
    }
    this.els.memberSelect.replaceChildren();
    for (const m of members) {
      this.membersById.set(m.member_id, m);
      const opt = document.createElement("option");
      opt.value = m.member_id;
      opt.textContent = m.member_id;
      this.els.memberSelect.append(opt);
    }
    this.els.memberSelect.disabled = members.length === 0;
    this.showIntents();
  }

  private showIntents(): void {
    const m = this.membersById.get(this.els.memberSelect.value);
    this.els.intentBadges.replaceChildren();
    for (const intent of m?.active_intents ?? []) {
      const badge = document.createElement("span");
      badge.className = "intent-badge";
      badge.textContent = intent;
      this.els.intentBadges.append(badge);
    }
  }

  /** Runs a search; responses arriving after a newer search are discarded. */
  async runSearch(): Promise<void> {
    const query = this.els.queryInput.value.trim();
    const memberId = this.els.memberSelect.value;
    if (query === "" || memberId === "") {
      return;
    }
    const seq = ++this.searchSeq;
    let data: unknown;
    try {
      data = await this.api.search(query, memberId);
    } catch {
      if (seq === this.searchSeq) {
        renderSerp(this.els.results, null, () => {});
      }
      return;
    }
    if (seq !== this.searchSeq) {
      return; // stale response
    }
    const ok = renderSerp(this.els.results, data, (position, kind) => {
      if (this.currentSerpId !== null) {
        this.reporter.report(this.currentSerpId, position, kind);
      }
    });
    this.currentSerpId = ok ? (data as { serp_id: string }).serp_id : null;
  }
}

export function bootstrap(): void {
  const app = new App({
    form: document.getElementById("search-form") as HTMLFormElement,
    queryInput: document.getElementById("query") as HTMLInputElement,
    memberSelect: document.getElementById("member") as HTMLSelectElement,
    intentBadges: document.getElementById("intent-badges") as HTMLElement,
    results: document.getElementById("results") as HTMLElement,
  });
  void app.init();
}

if (typeof document !== "undefined" && document.getElementById("search-form") !== null) {
  bootstrap();
}
