"""Quantum conditional probability operators, compound states and positive-map classification."""

from .channels import KrausChannel, LinearMap
from .classify import ClassificationReport, DiagFamilyParams
from .qcpo import CompoundState, OhyaDecomposition, Qcpo

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport",
    "CompoundState",
    "DiagFamilyParams",
    "KrausChannel",
    "LinearMap",
    "OhyaDecomposition",
    "Qcpo",
]
