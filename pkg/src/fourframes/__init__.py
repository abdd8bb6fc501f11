"""Jet-based differential geometry on 4-dimensional coordinate charts."""

from .jets import BACKEND, Jet, ScalarJetField, Sample, jet_eval, partial

__version__ = "0.1.0"

__all__ = ["BACKEND", "Jet", "ScalarJetField", "Sample", "jet_eval", "partial"]
