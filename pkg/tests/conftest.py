"""Shared fixtures: a hand-annotated figure-style sentence and a small
memorizable training corpus built from one sentence template.
"""

from __future__ import annotations

import pytest

from trialtables.corpus.records import EntitySpan, RelationEdge, make_doc, tokenize


def trial_doc(outcome: str, m1: str, drug1: str, m2: str, drug2: str, pmid: str, sent: int = 0):
    """One templated result sentence with full gold annotations.

    Layout: "<outcome> was <m1> with <drug1> and <m2> with <drug2> ." where
    the outcome phrase may span several tokens and each other slot is one.
    """
    n = len(tokenize(outcome))
    text = f"{outcome} was {m1} with {drug1} and {m2} with {drug2}."
    entities = (
        EntitySpan("OC", 0, n - 1),
        EntitySpan("MEAS", n + 1, n + 1),
        EntitySpan("INTV", n + 3, n + 3),
        EntitySpan("MEAS", n + 5, n + 5),
        EntitySpan("INTV", n + 7, n + 7),
    )
    relations = (
        RelationEdge("OC_RES", 0, n + 1),
        RelationEdge("A1_RES", n + 3, n + 1),
        RelationEdge("OC_RES", 0, n + 5),
        RelationEdge("A2_RES", n + 7, n + 5),
    )
    return make_doc(text, entities, relations, meta={"pmid": pmid, "sent": sent})


_FIG_TEXT = (
    "Mean IOP reduction was 31% with latanoprost and 26% with timolol, "
    "and ocular adverse events occurred in 5% and 9% of patients respectively."
)


def build_fig_doc():
    """Two-outcome glaucoma sentence whose gold table is known by hand."""
    doc = make_doc(_FIG_TEXT, meta={"pmid": "4290", "sent": 7, "domain": "glaucoma"})
    entities = (
        EntitySpan("OC", 0, 2),      # Mean IOP reduction
        EntitySpan("MEAS", 4, 4),    # 31%
        EntitySpan("INTV", 6, 6),    # latanoprost
        EntitySpan("MEAS", 8, 8),    # 26%
        EntitySpan("INTV", 10, 10),  # timolol
        EntitySpan("OC", 13, 15),    # ocular adverse events
        EntitySpan("MEAS", 18, 18),  # 5%
        EntitySpan("MEAS", 20, 20),  # 9%
    )
    relations = (
        RelationEdge("OC_RES", 0, 4),
        RelationEdge("A1_RES", 6, 4),
        RelationEdge("OC_RES", 0, 8),
        RelationEdge("A2_RES", 10, 8),
        RelationEdge("OC_RES", 13, 18),
        RelationEdge("A1_RES", 6, 18),
        RelationEdge("OC_RES", 13, 20),
        RelationEdge("A2_RES", 10, 20),
    )
    return doc.with_entities(entities, relations)


# Expected gold table of build_fig_doc, written out by hand.
FIG_GOLD_CSV = (
    "outcome,latanoprost,timolol\n"
    "Mean IOP reduction,31%,26%\n"
    "ocular adverse events,5%,9%\n"
)

_OUTCOMES = (
    "Mean IOP reduction", "Mean HbA1c decrease", "Visual acuity gain",
    "Systolic blood pressure drop", "Tumour response rate", "Overall survival",
    "Fasting glucose reduction", "Seizure frequency decline", "Pain score improvement",
    "Serum cholesterol fall", "Relapse rate", "Hospital readmission rate",
    "Body weight loss", "Bone density increase", "Wound healing rate",
    "Anxiety score reduction", "Stroke incidence", "Exercise capacity gain",
    "Cough frequency decrease", "Sleep duration increase",
)
_DRUGS = (
    ("latanoprost", "timolol"), ("metformin", "glipizide"), ("ranibizumab", "placebo"),
    ("lisinopril", "amlodipine"), ("nivolumab", "docetaxel"), ("imatinib", "interferon"),
    ("insulin", "sitagliptin"), ("levetiracetam", "valproate"), ("duloxetine", "pregabalin"),
    ("atorvastatin", "ezetimibe"), ("rituximab", "methotrexate"), ("carvedilol", "bisoprolol"),
    ("liraglutide", "orlistat"), ("alendronate", "denosumab"), ("becaplermin", "saline"),
    ("sertraline", "buspirone"), ("apixaban", "warfarin"), ("salmeterol", "tiotropium"),
    ("codeine", "dextromethorphan"), ("melatonin", "zolpidem"),
)


def build_train20():
    """Twenty fully annotated sentences with disjoint drug vocabularies."""
    docs = []
    for i in range(20):
        m1 = f"{10 + 3 * i}%"
        m2 = f"{11 + 2 * i}%"
        docs.append(
            trial_doc(_OUTCOMES[i], m1, _DRUGS[i][0], m2, _DRUGS[i][1], pmid=f"20{i:02d}")
        )
    return docs


@pytest.fixture
def fig_doc():
    return build_fig_doc()


@pytest.fixture(scope="session")
def train20():
    return build_train20()
