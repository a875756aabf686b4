/** Local mirror of the service's correction validation.

The strings must match the service byte for byte: the workbench shows them
while submit is disabled, and the service returns the same list in a 422,
so any drift would surface two different explanations of one problem.
*/

import {
  EdgeRecord,
  ENTITY_LABELS,
  RELATION_LABELS,
  SpanRecord,
} from "./types.js";

const GOLD_PARENT_LABELS: readonly string[] = ["INTV", "OC"];
const GOLD_CHILD_LABEL = "MEAS";

/** Single-quoted literal matching the service's repr-style quoting. */
export function quoted(value: string): string {
  const escaped = value.replace(/\\/g, "\\\\").replace(/'/g, "\\'");
  return `'${escaped}'`;
}

/** Structural problems: labels, bounds, overlap, endpoint resolution. */
export function structuralViolations(
  tokenCount: number,
  spans: readonly SpanRecord[],
  edges: readonly EdgeRecord[],
): string[] {
  const problems: string[] = [];
  const covered = new Map<number, SpanRecord>();
  const byStart = new Map<number, SpanRecord>();
  for (const span of spans) {
    if (!(ENTITY_LABELS as readonly string[]).includes(span.label)) {
      problems.push(`span at ${span.token_start} has unknown label ${quoted(span.label)}`);
    }
    if (!(0 <= span.token_start && span.token_start <= span.token_end && span.token_end < tokenCount)) {
      problems.push(
        `span [${span.token_start},${span.token_end}] outside token range 0..${tokenCount - 1}`,
      );
      continue;
    }
    for (let idx = span.token_start; idx <= span.token_end; idx++) {
      const holder = covered.get(idx);
      if (holder !== undefined) {
        problems.push(`span at ${span.token_start} overlaps span at ${holder.token_start}`);
        break;
      }
      covered.set(idx, span);
    }
    byStart.set(span.token_start, span);
  }
  for (const edge of edges) {
    if (!(RELATION_LABELS as readonly string[]).includes(edge.label)) {
      problems.push(`relation ${edge.head}->${edge.child} has unknown label ${quoted(edge.label)}`);
    }
    if (edge.head === edge.child) {
      problems.push(`relation at ${edge.head} links a span to itself`);
    }
    for (const [endName, spanId] of [["parent", edge.head], ["child", edge.child]] as const) {
      if (!byStart.has(spanId)) {
        problems.push(`relation ${endName} id ${spanId} resolves to no span`);
      }
    }
  }
  return problems;
}

/** Structural problems plus the directionality rules corrections must obey. */
export function correctionViolations(
  tokenCount: number,
  spans: readonly SpanRecord[],
  edges: readonly EdgeRecord[],
): string[] {
  const problems = structuralViolations(tokenCount, spans, edges);
  const byStart = new Map(spans.map((s) => [s.token_start, s]));
  for (const edge of edges) {
    const parent = byStart.get(edge.head);
    const child = byStart.get(edge.child);
    if (parent !== undefined && !GOLD_PARENT_LABELS.includes(parent.label)) {
      problems.push(`relation parent at ${edge.head} must be INTV or OC, got ${parent.label}`);
    }
    if (child !== undefined && child.label !== GOLD_CHILD_LABEL) {
      problems.push(`relation child at ${edge.child} must be MEAS, got ${child.label}`);
    }
  }
  return problems;
}
