"""dfs-kit: open-system channels, decoherence-free subspace/subsystem
discovery, collective-decoherence encodings, encoded-gate verification, and
energetically protected spin models, with a JSON-reporting CLI."""

__version__ = "0.1.0"
