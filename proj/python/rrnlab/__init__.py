"""Ontology-reasoning workbench: symbolic oracle, benchmark generators, and a
recursive reasoning network, backed by the C++ core."""

from ._core import (
    KbError,
    ParseLocationError,
    Program,
    countries_ontology,
    entails,
    evaluate,
    export_embeddings,
    family_ontology,
    generate_countries_dataset,
    generate_family_dataset,
    incidence_vector,
    label_queries,
    materialize,
    run_cli,
    run_experiment,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "KbError",
    "ParseLocationError",
    "Program",
    "countries_ontology",
    "entails",
    "evaluate",
    "export_embeddings",
    "family_ontology",
    "generate_countries_dataset",
    "generate_family_dataset",
    "incidence_vector",
    "label_queries",
    "materialize",
    "run_cli",
    "run_experiment",
    "train",
]
