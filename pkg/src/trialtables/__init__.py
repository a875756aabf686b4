"""Entity, relation, and evidence-table extraction for trial result sentences."""

from trialtables.corpus.records import (
    Doc,
    EntitySpan,
    RelationEdge,
    Token,
    make_doc,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "Doc",
    "EntitySpan",
    "RelationEdge",
    "Token",
    "make_doc",
    "tokenize",
    "__version__",
]
