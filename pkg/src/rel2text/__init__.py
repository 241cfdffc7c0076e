"""Knowledge-graph-to-text dataset engineering and evaluation toolkit.

Builds and evaluates datasets of single-triple verbalizations: KG ingestion
with filtering, leakage-aware splits, input linearization and masking,
baseline verbalizers, lexical metrics, and an annotation-collection service.
"""

__version__ = "0.1.0"
