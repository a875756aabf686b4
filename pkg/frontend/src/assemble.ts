/** Local evidence-table assembly, rule-for-rule equal to the service.

The preview this produces must match the table the service would return
for the same annotation state, including diagnostic wording and ordering,
so reviewers see exactly what submitting would store. Only valid states
(no structural violations) are assembled.
*/

import { DocRecord, EdgeRecord, SpanRecord, TableData, TokenRecord } from "./types.js";

const OUTCOME_HEADER = "outcome";
const CELL_JOIN = "; ";

// Column index per arm edge label; arm identity never comes from surface order.
const ARM_COLUMN: Record<string, 0 | 1> = { A1_RES: 0, A2_RES: 1 };

interface Placement {
  outcomeId: number | null;
  column: 0 | 1;
  armParent: number;
}

function spanText(text: string, tokens: readonly TokenRecord[], span: SpanRecord): string {
  const first = tokens[span.token_start];
  const last = tokens[span.token_end];
  if (first === undefined || last === undefined) {
    throw new Error(`span [${span.token_start},${span.token_end}] outside the token range`);
  }
  return text.slice(first.start, last.end);
}

function sortedSpans(spans: readonly SpanRecord[]): SpanRecord[] {
  return [...spans].sort((a, b) => a.token_start - b.token_start);
}

function sortedEdges(edges: readonly EdgeRecord[]): EdgeRecord[] {
  return [...edges].sort(
    (a, b) =>
      a.head - b.head ||
      a.child - b.child ||
      (a.label < b.label ? -1 : a.label > b.label ? 1 : 0),
  );
}

/** Resolve each measure to (outcome row, arm column); record every drop. */
function measPlacements(
  spans: readonly SpanRecord[],
  edges: readonly EdgeRecord[],
  diagnostics: string[],
): Map<number, Placement> {
  const labels = new Map(spans.map((s) => [s.token_start, s.label]));
  const ocParents = new Map<number, number[]>();
  const armEdges = new Map<number, Array<[number, number]>>();
  for (const edge of edges) {
    if (labels.get(edge.child) !== "MEAS") {
      diagnostics.push(
        `edge ${edge.label} ${edge.head}->${edge.child} ignored: child is not a measure`,
      );
      continue;
    }
    if (edge.label === "OC_RES") {
      if (labels.get(edge.head) !== "OC") {
        diagnostics.push(
          `edge OC_RES ${edge.head}->${edge.child} ignored: parent is not an outcome`,
        );
        continue;
      }
      let parents = ocParents.get(edge.child);
      if (parents === undefined) ocParents.set(edge.child, (parents = []));
      parents.push(edge.head);
    } else {
      const column = ARM_COLUMN[edge.label];
      if (column === undefined) {
        throw new Error(`unreachable: edge label ${edge.label} on a validated state`);
      }
      if (labels.get(edge.head) !== "INTV") {
        diagnostics.push(
          `edge ${edge.label} ${edge.head}->${edge.child}: ` +
            "parent is not an intervention; column kept, header vote skipped",
        );
      }
      let list = armEdges.get(edge.child);
      if (list === undefined) armEdges.set(edge.child, (list = []));
      list.push([column, edge.head]);
    }
  }
  const placements = new Map<number, Placement>();
  for (const span of spans) {
    if (span.label !== "MEAS") continue;
    let outcomeId: number | null = null;
    const parents = [...(ocParents.get(span.token_start) ?? [])].sort((a, b) => a - b);
    if (parents.length > 0) {
      outcomeId = parents[0]!;
      if (parents.length > 1) {
        diagnostics.push(
          `measure ${span.token_start} has ${parents.length} outcome parents; ` +
            `kept earliest (${outcomeId})`,
        );
      }
    }
    const options = [...(armEdges.get(span.token_start) ?? [])].sort(
      (a, b) => a[0] - b[0] || a[1] - b[1],
    );
    if (options.length === 0) {
      if (outcomeId !== null) {
        diagnostics.push(
          `measure ${span.token_start} linked to outcome ${outcomeId} but has no arm edge; ` +
            "not placed in a cell",
        );
      }
      continue;
    }
    const [column, armParent] = options[0]!;
    if (options.length > 1) {
      diagnostics.push(
        `measure ${span.token_start} has ${options.length} arm edges; kept arm ${column + 1}`,
      );
    }
    placements.set(span.token_start, { outcomeId, column: column as 0 | 1, armParent });
  }
  return placements;
}

/** Majority vote over intervention parents; earliest span breaks ties. */
function armHeader(
  text: string,
  tokens: readonly TokenRecord[],
  byStart: Map<number, SpanRecord>,
  votes: readonly number[],
): string {
  if (votes.length === 0) return "";
  const counts = new Map<number, number>();
  for (const parent of votes) counts.set(parent, (counts.get(parent) ?? 0) + 1);
  let winner = -1;
  let winnerCount = -1;
  for (const [pid, count] of counts) {
    if (count > winnerCount || (count === winnerCount && pid < winner)) {
      winner = pid;
      winnerCount = count;
    }
  }
  return spanText(text, tokens, byStart.get(winner)!);
}

/** Build the evidence table for one annotation state; total on valid states. */
export function assembleTable(
  text: string,
  tokens: readonly TokenRecord[],
  rawSpans: readonly SpanRecord[],
  rawEdges: readonly EdgeRecord[],
): TableData {
  const spans = sortedSpans(rawSpans);
  const edges = sortedEdges(rawEdges);
  const diagnostics: string[] = [];
  const placements = measPlacements(spans, edges, diagnostics);
  const byStart = new Map(spans.map((s) => [s.token_start, s]));

  const ocIds = spans.filter((s) => s.label === "OC").map((s) => s.token_start);
  const cells = new Map<number, [number[], number[]]>(ocIds.map((oc) => [oc, [[], []]]));
  const orphan: [number[], number[]] = [[], []];
  const votes: [number[], number[]] = [[], []];
  for (const measId of [...placements.keys()].sort((a, b) => a - b)) {
    const { outcomeId, column, armParent } = placements.get(measId)!;
    const target = outcomeId !== null ? cells.get(outcomeId)! : orphan;
    target[column].push(measId);
    if (byStart.get(armParent)?.label === "INTV") votes[column].push(armParent);
  }

  const cellText = (measIds: number[]): string =>
    [...measIds]
      .sort((a, b) => a - b)
      .map((mid) => spanText(text, tokens, byStart.get(mid)!))
      .join(CELL_JOIN);

  const rows = ocIds.map((oc) => {
    const [arm1, arm2] = cells.get(oc)!;
    return [spanText(text, tokens, byStart.get(oc)!), cellText(arm1), cellText(arm2)];
  });
  if (orphan[0].length > 0 || orphan[1].length > 0) {
    rows.push(["", cellText(orphan[0]), cellText(orphan[1])]);
  }
  return {
    header: [
      OUTCOME_HEADER,
      armHeader(text, tokens, byStart, votes[0]),
      armHeader(text, tokens, byStart, votes[1]),
    ],
    rows,
    diagnostics,
  };
}

/** Assemble straight from a service record. */
export function assembleRecord(record: DocRecord): TableData {
  return assembleTable(record.text, record.tokens, record.spans, record.relations);
}
