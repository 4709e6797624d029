"""QuPST - graph-transformer estimation of quantum circuit reliability (PST)."""

__version__ = "0.1.0"
