"""Corpus-level count checks against the released dataset's label totals."""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

# Published label totals for the full released corpus. The reported overall
# sentence count ("over 595") exceeds the per-domain sum of 588, so only the
# per-domain figures are enforced; totals are reported as found.
EXPECTED_ENTITY_TOTALS = {"INTV": 1163, "MEAS": 1526, "OC": 820}
EXPECTED_RELATION_TOTALS = {"OC_RES": 1468, "A1_RES": 747, "A2_RES": 660}
EXPECTED_DOMAIN_SENTENCES = {
    "glaucoma": 214,
    "autism": 47,
    "blood cancer": 16,
    "solid tumour cancer": 130,
    "diabetes": 51,
    "cardiovascular disease": 130,
}

CORPUS_ENV_VAR = "TRIALTABLES_CORPUS"


@dataclass(frozen=True)
class AuditReport:
    n_docs: int
    entity_counts: dict[str, int]
    relation_counts: dict[str, int]
    domain_counts: dict[str, int]
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def lines(self) -> list[str]:
        out = [f"docs\t{self.n_docs}"]
        for label in sorted(self.entity_counts):
            out.append(f"entity\t{label}\t{self.entity_counts[label]}")
        for label in sorted(self.relation_counts):
            out.append(f"relation\t{label}\t{self.relation_counts[label]}")
        for domain in sorted(self.domain_counts):
            out.append(f"domain\t{domain}\t{self.domain_counts[domain]}")
        for problem in self.mismatches:
            out.append(f"mismatch\t{problem}")
        return out


def audit_corpus(docs, enforce_domains: bool = True) -> AuditReport:
    """Tally labels and domains and compare them with the published totals."""
    docs = list(docs)
    entity_counts: Counter = Counter()
    relation_counts: Counter = Counter()
    domain_counts: Counter = Counter()
    for doc in docs:
        entity_counts.update(span.label for span in doc.entities)
        relation_counts.update(edge.label for edge in doc.relations)
        domain_counts[doc.meta.get("domain", "")] += 1

    mismatches = []
    for expected, found, kind in (
        (EXPECTED_ENTITY_TOTALS, entity_counts, "entity"),
        (EXPECTED_RELATION_TOTALS, relation_counts, "relation"),
    ):
        for label, count in expected.items():
            if found.get(label, 0) != count:
                mismatches.append(f"{kind} {label}: expected {count}, found {found.get(label, 0)}")
    if enforce_domains:
        for domain, count in EXPECTED_DOMAIN_SENTENCES.items():
            if domain_counts.get(domain, 0) != count:
                mismatches.append(
                    f"domain {domain}: expected {count} sentences, found {domain_counts.get(domain, 0)}"
                )
    return AuditReport(
        n_docs=len(docs),
        entity_counts=dict(entity_counts),
        relation_counts=dict(relation_counts),
        domain_counts=dict(domain_counts),
        mismatches=tuple(mismatches),
    )


def released_corpus_path() -> Path | None:
    """Path to the released corpus annotation file, when configured."""
    value = os.environ.get(CORPUS_ENV_VAR, "").strip()
    if not value:
        return None
    path = Path(value)
    return path if path.exists() else None
