/** Wire types of the review service, key names as serialized. */

export const ENTITY_LABELS = ["INTV", "MEAS", "OC"] as const;
export const RELATION_LABELS = ["OC_RES", "A1_RES", "A2_RES"] as const;

export type EntityLabel = (typeof ENTITY_LABELS)[number];
export type RelationLabel = (typeof RELATION_LABELS)[number];
export type Answer = "accept" | "reject" | "pending";
export type ItemStatus = "pending" | "accepted" | "rejected";
export type Verdict = "accept" | "reject";

/** One token with character offsets into its sentence. */
export interface TokenRecord {
  text: string;
  start: number;
  end: number;
  id: number;
}

/** Inclusive token range; identity is token_start (spans never overlap). */
export interface SpanRecord {
  token_start: number;
  token_end: number;
  label: string;
}

/** Directed edge between spans, referenced by their start token indexes. */
export interface EdgeRecord {
  head: number;
  child: number;
  label: string;
}

/** One annotated sentence in the service's record format. */
export interface DocRecord {
  text: string;
  tokens: TokenRecord[];
  spans: SpanRecord[];
  relations: EdgeRecord[];
  meta: Record<string, unknown>;
  answer: Answer;
}

/** Assembled evidence table: header, (outcome, arm 1, arm 2) rows, notes. */
export interface TableData {
  header: string[];
  rows: string[][];
  diagnostics: string[];
}

export interface ReviewItem {
  item_id: number;
  doc_id: string;
  status: ItemStatus;
  revision: number;
  created_ts: string;
  updated_ts: string;
  record: DocRecord;
  table: TableData;
}

export interface QueuePage {
  items: ReviewItem[];
  page: number;
  pages: number;
  total: number;
}

export interface CorrectionPayload {
  spans: SpanRecord[];
  relations: EdgeRecord[];
  verdict: Verdict;
}

/** Error envelope every non-2xx service response carries. */
export interface ApiErrorBody {
  code: string;
  message: string;
  violations: string[];
}

/** Queue-card summary derived from a full item. */
export interface ItemSummary {
  itemId: number;
  docId: string;
  status: ItemStatus;
  text: string;
  spanCount: number;
  edgeCount: number;
}

export function summarize(item: ReviewItem): ItemSummary {
  return {
    itemId: item.item_id,
    docId: item.doc_id,
    status: item.status,
    text: item.record.text,
    spanCount: item.record.spans.length,
    edgeCount: item.record.relations.length,
  };
}
