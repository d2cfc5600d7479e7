"""xsams-provenance - provenance, merging and citation for XSAMS documents, plus a Query Store service."""

__version__ = "0.1.0"
