// Mirrors the service's schema_version 1 JSON responses.

export const SCHEMA_VERSION = 1;

export interface DocView {
  doc_id: string;
  title: string;
  snippet: string;
  base_score: number;
}

export interface ResultItem extends DocView {
  position: number;
  type: "result";
  vertical: string;
}

export interface BlockItem {
  position: number;
  type: "block";
  vertical: string;
  header: string;
  block_score: number;
  children: DocView[];
}

export type SerpItem = ResultItem | BlockItem;

export interface SearchResponse {
  schema_version: number;
  serp_id: string | null;
  query: string;
  member_id: string;
  primary_vertical: string | null;
  no_eligible_vertical: boolean;
  items: SerpItem[];
}

export interface MemberSummary {
  member_id: string;
  title: string;
  active_intents: string[];
}

export type ClickKind = "ResultClick" | "HeaderClick";
