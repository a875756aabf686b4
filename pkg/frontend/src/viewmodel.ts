/** Editable working copy of one review item.

Edits apply to local copies of the spans and edges; the fetched item is
never mutated, so a conflict or rejection can always fall back to what
the service last confirmed. Validation runs locally after every edit
with the same rules and wording the service enforces, which is what lets
the workbench disable submission before a doomed round trip.
*/

import { assembleTable } from "./assemble.js";
import { correctionViolations } from "./invariants.js";
import {
  CorrectionPayload,
  EdgeRecord,
  ReviewItem,
  SpanRecord,
  TableData,
  TokenRecord,
  Verdict,
} from "./types.js";

function cloneTable(table: TableData): TableData {
  return {
    header: [...table.header],
    rows: table.rows.map((row) => [...row]),
    diagnostics: [...table.diagnostics],
  };
}

export class ReviewViewModel {
  readonly item: ReviewItem;
  private spansWork: SpanRecord[];
  private edgesWork: EdgeRecord[];
  private dirtyFlag = false;
  private conflictMsg: string | null = null;
  private rejection: readonly string[] | null = null;
  private lastValid: TableData;

  constructor(item: ReviewItem) {
    this.item = item;
    this.spansWork = item.record.spans.map((s) => ({ ...s }));
    this.edgesWork = item.record.relations.map((e) => ({ ...e }));
    this.lastValid = cloneTable(item.table);
  }

  get itemId(): number {
    return this.item.item_id;
  }

  get revision(): number {
    return this.item.revision;
  }

  get text(): string {
    return this.item.record.text;
  }

  get tokens(): readonly TokenRecord[] {
    return this.item.record.tokens;
  }

  get spans(): SpanRecord[] {
    return this.spansWork.map((s) => ({ ...s }));
  }

  get edges(): EdgeRecord[] {
    return this.edgesWork.map((e) => ({ ...e }));
  }

  /** True once any edit has been applied, even if later edits undo it. */
  get dirty(): boolean {
    return this.dirtyFlag;
  }

  /** Message from a concurrent-resolution conflict, or null. */
  get conflict(): string | null {
    return this.conflictMsg;
  }

  /** Violations the service returned for the last rejected submission. */
  get serverRejection(): readonly string[] | null {
    return this.rejection;
  }

  /** What the service would object to if this state were submitted now. */
  violations(): string[] {
    return correctionViolations(this.tokens.length, this.spansWork, this.edgesWork);
  }

  get submitEnabled(): boolean {
    return this.conflictMsg === null && this.violations().length === 0;
  }

  /** Table for the current state, or the most recent valid one while invalid. */
  preview(): TableData {
    if (this.violations().length === 0) {
      this.lastValid = assembleTable(
        this.text,
        this.tokens,
        this.spansWork,
        this.edgesWork,
      );
    }
    return cloneTable(this.lastValid);
  }

  private touch(): void {
    this.dirtyFlag = true;
    this.rejection = null;
  }

  private spanAt(tokenStart: number): SpanRecord {
    const span = this.spansWork.find((s) => s.token_start === tokenStart);
    if (span === undefined) {
      throw new Error(`no span starts at token ${tokenStart}`);
    }
    return span;
  }

  private edgeIndex(head: number, child: number, label: string): number {
    const idx = this.edgesWork.findIndex(
      (e) => e.head === head && e.child === child && e.label === label,
    );
    if (idx < 0) {
      throw new Error(`no ${label} edge ${head}->${child}`);
    }
    return idx;
  }

  addSpan(tokenStart: number, tokenEnd: number, label: string): void {
    this.spansWork.push({ token_start: tokenStart, token_end: tokenEnd, label });
    this.touch();
  }

  /** Remove the span only; edges that referenced it become violations. */
  removeSpan(tokenStart: number): void {
    const span = this.spanAt(tokenStart);
    this.spansWork = this.spansWork.filter((s) => s !== span);
    this.touch();
  }

  relabelSpan(tokenStart: number, label: string): void {
    this.spanAt(tokenStart).label = label;
    this.touch();
  }

  /** Move span boundaries; edges follow the span when its start moves. */
  resizeSpan(tokenStart: number, newStart: number, newEnd: number): void {
    const span = this.spanAt(tokenStart);
    span.token_start = newStart;
    span.token_end = newEnd;
    if (newStart !== tokenStart) {
      for (const edge of this.edgesWork) {
        if (edge.head === tokenStart) edge.head = newStart;
        if (edge.child === tokenStart) edge.child = newStart;
      }
    }
    this.touch();
  }

  addEdge(head: number, child: number, label: string): void {
    this.edgesWork.push({ head, child, label });
    this.touch();
  }

  removeEdge(head: number, child: number, label: string): void {
    this.edgesWork.splice(this.edgeIndex(head, child, label), 1);
    this.touch();
  }

  relabelEdge(head: number, child: number, label: string, newLabel: string): void {
    this.edgesWork[this.edgeIndex(head, child, label)]!.label = newLabel;
    this.touch();
  }

  toCorrection(verdict: Verdict): CorrectionPayload {
    return { spans: this.spans, relations: this.edges, verdict };
  }

  markConflict(message: string): void {
    this.conflictMsg = message;
  }

  noteRejection(violations: readonly string[]): void {
    this.rejection = [...violations];
  }
}
