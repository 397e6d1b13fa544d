import { SCHEMA_VERSION } from "./types.js";
import type { BlockItem, ResultItem, SearchResponse } from "./types.js";

export type ClickHandler = (position: number, clickKind: "ResultClick" | "HeaderClick") => void;

function resultRow(item: ResultItem, onClick: ClickHandler): HTMLElement {
  const row = document.createElement("div");
  row.className = "result-row";
  row.dataset.position = String(item.position);

  const title = document.createElement("a");
  title.className = "result-title";
  title.href = "#";
  title.textContent = item.title;
  title.addEventListener("click", (ev) => {
    ev.preventDefault();
    onClick(item.position, "ResultClick");
  });

  const meta = document.createElement("span");
  meta.className = "result-vertical";
  meta.textContent = item.vertical;

  const snippet = document.createElement("p");
  snippet.className = "result-snippet";
  snippet.textContent = item.snippet;

  row.append(title, meta, snippet);
  return row;
}

function blockCluster(item: BlockItem, onClick: ClickHandler): HTMLElement {
  const cluster = document.createElement("div");
  cluster.className = "block-cluster";
  cluster.dataset.position = String(item.position);
  cluster.dataset.vertical = item.vertical;

  const header = document.createElement("a");
  header.className = "block-header";
  header.href = "#";
  header.textContent = item.header;
  header.addEventListener("click", (ev) => {
    ev.preventDefault();
    onClick(item.position, "HeaderClick");
  });
  cluster.append(header);

  for (const child of item.children) {
    const row = document.createElement("div");
    row.className = "block-child";
    const title = document.createElement("a");
    title.className = "result-title";
    title.href = "#";
    title.textContent = child.title;
    title.addEventListener("click", (ev) => {
      ev.preventDefault();
      onClick(item.position, "ResultClick");
    });
    const snippet = document.createElement("p");
    snippet.className = "result-snippet";
    snippet.textContent = child.snippet;
    row.append(title, snippet);
    cluster.append(row);
  }
  return cluster;
}

function isValidResponse(data: unknown): data is SearchResponse {
  if (typeof data !== "object" || data === null) return false;
  const r = data as Record<string, unknown>;
  return r.schema_version === SCHEMA_VERSION && typeof r.serp_id === "string" && Array.isArray(r.items);
}

/**
 * Renders a search response into the container. Returns false (and shows an
 * error banner) when the payload does not match the expected schema.
 */
export function renderSerp(container: HTMLElement, data: unknown, onClick: ClickHandler): boolean {
  container.replaceChildren();

  if (!isValidResponse(data)) {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = "Unexpected response from search service.";
    container.append(banner);
    return false;
  }

  if (data.items.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "No results found.";
    container.append(empty);
    return true;
  }

  for (const item of data.items) {
    if (item.type === "block") {
      container.append(blockCluster(item, onClick));
    } else {
      container.append(resultRow(item, onClick));
    }
  }
  return true;
}

export function showToast(message: string): void {
  let toast = document.getElementById("toast");
  if (toast === null) {
    toast = document.createElement("div");
    toast.id = "toast";
    document.body.append(toast);
  }
  toast.textContent = message;
  toast.classList.add("visible");
  setTimeout(() => toast?.classList.remove("visible"), 3000);
}
