"""coreftk: cross-document event coreference toolkit.

Pipeline stages compose through files: ingest -> filter -> score ->
cluster -> evaluate / diversity, plus the metaphoric transformation
pipeline (transform -> align -> review -> export) that rewrites a corpus
while preserving its coreference annotations.
"""

__version__ = "0.1.0"
