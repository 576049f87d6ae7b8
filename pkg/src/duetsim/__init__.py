"""Deterministic performance simulator for disaggregated hybrid
SSM/attention LLM accelerators: descriptor loading, numerical oracles,
cycle-level engine models, an inference pipeline, and roofline/DSE analysis.
"""

__version__ = "0.1.0"
