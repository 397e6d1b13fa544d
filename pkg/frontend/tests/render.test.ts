import { beforeEach, describe, expect, it, vi } from "vitest";
import { renderSerp } from "../src/render.js";
import type { SearchResponse } from "../src/types.js";

function sampleResponse(): SearchResponse {
  return {
    schema_version: 1,
    serp_id: "serp-1",
    query: "python",
    member_id: "m1",
    intents: ["JobSeeking"],
    no_eligible_vertical: false,
    items: [
      { type: "result", position: 0, vertical: "Jobs", doc_id: "j1", title: "Job one", snippet: "s1", base_score: 1.0 },
      {
        type: "block",
        position: 1,
        vertical: "Groups",
        header: "see all Groups results",
        block_score: 0.8,
        children: [
          { doc_id: "g1", title: "Group one", snippet: "gs1", base_score: 0.9 },
          { doc_id: "g2", title: "Group two", snippet: "gs2", base_score: 0.7 },
        ],
      },
      { type: "result", position: 2, vertical: "Jobs", doc_id: "j2", title: "Job two", snippet: "s2", base_score: 0.9 },
      { type: "result", position: 3, vertical: "Jobs", doc_id: "j3", title: "Job three", snippet: "s3", base_score: 0.8 },
    ],
  };
}

describe("renderSerp", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="results"></div>';
    container = document.getElementById("results") as HTMLElement;
  });

  it("renders one row per result and one cluster per block", () => {
    const ok = renderSerp(container, sampleResponse(), () => {});
    expect(ok).toBe(true);
    expect(container.querySelectorAll(".result-row")).toHaveLength(3);
    const clusters = container.querySelectorAll(".block-cluster");
    expect(clusters).toHaveLength(1);
    expect(clusters[0].querySelector(".block-header")?.textContent).toBe("see all Groups results");
    expect(clusters[0].querySelectorAll(".block-child")).toHaveLength(2);
  });

  it("keeps item order and positions", () => {
    renderSerp(container, sampleResponse(), () => {});
    const positions = Array.from(container.children).map((el) => (el as HTMLElement).dataset.position);
    expect(positions).toEqual(["0", "1", "2", "3"]);
  });

  it("shows an empty state when there are no items", () => {
    const data = { ...sampleResponse(), items: [] };
    const ok = renderSerp(container, data, () => {});
    expect(ok).toBe(true);
    expect(container.querySelector(".empty-state")?.textContent).toBe("No results found.");
    expect(container.querySelectorAll(".result-row")).toHaveLength(0);
  });

  it("shows an error banner on malformed payloads without throwing", () => {
    for (const bad of [null, 42, "nope", {}, { schema_version: 99, serp_id: "x", items: [] }]) {
      const ok = renderSerp(container, bad, () => {});
      expect(ok).toBe(false);
      expect(container.querySelector(".error-banner")).not.toBeNull();
    }
  });

  it("wires click handlers with position and kind", () => {
    const onClick = vi.fn();
    renderSerp(container, sampleResponse(), onClick);

    (container.querySelector(".result-row .result-title") as HTMLElement).click();
    expect(onClick).toHaveBeenLastCalledWith(0, "ResultClick");

    (container.querySelector(".block-header") as HTMLElement).click();
    expect(onClick).toHaveBeenLastCalledWith(1, "HeaderClick");

    (container.querySelector(".block-child .result-title") as HTMLElement).click();
    expect(onClick).toHaveBeenLastCalledWith(1, "ResultClick");
  });
});
