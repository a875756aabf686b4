"""Regenerate tests/fixtures/preview_parity.json from the Python toolkit.

Each fixture pairs one annotation state (text, tokens, spans, relations)
with the table the service assembles for it, so the UI's local preview can
be checked field-for-field. Run from the repository root:

    python3 frontend/scripts/generate_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from trialtables.corpus.annofile import doc_to_record
from trialtables.corpus.records import EntitySpan, RelationEdge, make_doc
from trialtables.tabulate import assemble_table

E = EntitySpan
R = RelationEdge


def fig_doc():
    text = (
        "Mean IOP reduction was 31% with latanoprost and 26% with timolol, "
        "and ocular adverse events occurred in 5% and 9% of patients respectively."
    )
    doc = make_doc(text, meta={"pmid": "4290", "sent": 7})
    return doc.with_entities(
        (
            E("OC", 0, 2), E("MEAS", 4, 4), E("INTV", 6, 6), E("MEAS", 8, 8),
            E("INTV", 10, 10), E("OC", 13, 15), E("MEAS", 18, 18), E("MEAS", 20, 20),
        ),
        (
            R("OC_RES", 0, 4), R("A1_RES", 6, 4), R("OC_RES", 0, 8), R("A2_RES", 10, 8),
            R("OC_RES", 13, 18), R("A1_RES", 6, 18), R("OC_RES", 13, 20), R("A2_RES", 10, 20),
        ),
    )


def trial(outcome, m1, d1, m2, d2, pmid):
    n = len(make_doc(outcome).tokens)
    text = f"{outcome} was {m1} with {d1} and {m2} with {d2}."
    return make_doc(
        text,
        (
            E("OC", 0, n - 1), E("MEAS", n + 1, n + 1), E("INTV", n + 3, n + 3),
            E("MEAS", n + 5, n + 5), E("INTV", n + 7, n + 7),
        ),
        (
            R("OC_RES", 0, n + 1), R("A1_RES", n + 3, n + 1),
            R("OC_RES", 0, n + 5), R("A2_RES", n + 7, n + 5),
        ),
        meta={"pmid": pmid},
    )


def two_arm(text, pmid, spans, edges):
    return make_doc(text, spans, edges, meta={"pmid": pmid})


def build_states():
    states = [
        ("figure sentence, two outcomes", fig_doc()),
        ("template glaucoma", trial("Mean IOP reduction", "31%", "latanoprost", "26%", "timolol", "t1")),
        ("template diabetes", trial("Mean HbA1c decrease", "1.2%", "metformin", "0.8%", "glipizide", "t2")),
        ("template pain, multi-token outcome", trial("Pain score improvement", "3 points", "duloxetine", "1 point", "placebo", "t3")),
        ("no annotations at all", make_doc("No annotations at all here.", meta={"pmid": "s5"})),
        ("entities but no edges", two_arm(
            "Overall survival improved by 4 months with nivolumab.",
            "s6",
            [E("OC", 0, 1), E("MEAS", 4, 5), E("INTV", 7, 7)],
            [],
        )),
        ("orphan measures share a trailing row", two_arm(
            "Rates were 12% with apixaban and 17% with warfarin.",
            "s7",
            [E("MEAS", 2, 2), E("INTV", 4, 4), E("MEAS", 6, 6), E("INTV", 8, 8)],
            [R("A1_RES", 4, 2), R("A2_RES", 8, 6)],
        )),
        ("conflicting outcome parents keep the earliest", two_arm(
            "Relapse rate and readmission rate fell 9% with rituximab.",
            "s8",
            [E("OC", 0, 1), E("OC", 3, 4), E("MEAS", 6, 6), E("INTV", 8, 8)],
            [R("OC_RES", 0, 6), R("OC_RES", 3, 6), R("A1_RES", 8, 6)],
        )),
        ("conflicting arm edges prefer arm 1", two_arm(
            "Stroke incidence fell 2% with carvedilol or bisoprolol.",
            "s9",
            [E("OC", 0, 1), E("MEAS", 3, 3), E("INTV", 5, 5), E("INTV", 7, 7)],
            [R("OC_RES", 0, 3), R("A1_RES", 5, 3), R("A2_RES", 7, 3)],
        )),
        ("two same-column arm edges keep one vote", two_arm(
            "Seizure frequency fell 40% with levetiracetam plus valproate.",
            "s10",
            [E("OC", 0, 1), E("MEAS", 3, 3), E("INTV", 5, 5), E("INTV", 7, 7)],
            [R("OC_RES", 0, 3), R("A1_RES", 5, 3), R("A1_RES", 7, 3)],
        )),
        ("arm parent that is not an intervention", two_arm(
            "Wound healing rate reached 80% with becaplermin.",
            "s11",
            [E("OC", 0, 2), E("MEAS", 4, 4), E("INTV", 6, 6)],
            [R("OC_RES", 0, 4), R("A1_RES", 0, 4)],
        )),
        ("outcome edge from a non-outcome parent", two_arm(
            "Cough frequency dropped 30% with codeine.",
            "s12",
            [E("OC", 0, 1), E("MEAS", 3, 3), E("INTV", 5, 5)],
            [R("OC_RES", 5, 3), R("A1_RES", 5, 3)],
        )),
        ("relation child that is not a measure", two_arm(
            "Sleep duration increased 45 minutes with melatonin.",
            "s13",
            [E("OC", 0, 1), E("MEAS", 3, 4), E("INTV", 6, 6)],
            [R("OC_RES", 0, 3), R("A1_RES", 6, 3), R("A2_RES", 6, 0)],
        )),
        ("outcome-linked measure without an arm edge", two_arm(
            "Anxiety scores fell 5 points with sertraline.",
            "s14",
            [E("OC", 0, 1), E("MEAS", 3, 4), E("INTV", 6, 6)],
            [R("OC_RES", 0, 3)],
        )),
        ("outcome span with no measures at all", two_arm(
            "Bone density increase was not measured for denosumab.",
            "s15",
            [E("OC", 0, 2), E("INTV", 8, 8)],
            [],
        )),
        ("header vote tie resolves to the earliest span", two_arm(
            "Glucose fell 7% with insulin and 9% with sitagliptin daily.",
            "s16",
            [E("OC", 0, 0), E("MEAS", 2, 2), E("INTV", 4, 4), E("MEAS", 6, 6), E("INTV", 8, 8)],
            [R("OC_RES", 0, 2), R("A1_RES", 4, 2), R("OC_RES", 0, 6), R("A1_RES", 8, 6)],
        )),
        ("two measures join in one cell in token order", two_arm(
            "Tumour response reached 40% and 44% with imatinib.",
            "s17",
            [E("OC", 0, 1), E("MEAS", 3, 3), E("MEAS", 5, 5), E("INTV", 7, 7)],
            [R("OC_RES", 0, 3), R("OC_RES", 0, 5), R("A1_RES", 7, 3), R("A1_RES", 7, 5)],
        )),
        ("punctuation inside the outcome surface", two_arm(
            "Pain, severe, improved 2 points with codeine.",
            "s18",
            [E("OC", 0, 3), E("MEAS", 5, 6), E("INTV", 8, 8)],
            [R("OC_RES", 0, 5), R("A1_RES", 8, 5)],
        )),
        ("minimal single-token triangle", two_arm(
            "Survival doubled nivolumab.",
            "s19",
            [E("OC", 0, 0), E("MEAS", 1, 1), E("INTV", 2, 2)],
            [R("OC_RES", 0, 1), R("A1_RES", 2, 1)],
        )),
        ("mixed irregularities in one sentence", two_arm(
            "Relapse rate fell 9% with rituximab and 13% with methotrexate weekly.",
            "s20",
            [E("OC", 0, 1), E("MEAS", 3, 3), E("INTV", 5, 5), E("MEAS", 7, 7), E("INTV", 9, 9)],
            [R("OC_RES", 0, 3), R("A1_RES", 5, 3), R("A2_RES", 9, 3), R("A2_RES", 9, 7)],
        )),
    ]
    return states


def main():
    fixtures = []
    for name, doc in build_states():
        table = assemble_table(doc)
        record = doc_to_record(doc)
        fixtures.append(
            {
                "name": name,
                "record": record,
                "table": {
                    "header": list(table.header),
                    "rows": [list(row.astuple()) for row in table.rows],
                    "diagnostics": list(table.diagnostics),
                },
            }
        )
    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "preview_parity.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fixtures, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(fixtures)} states to {out}")


if __name__ == "__main__":
    main()
