"""Exact arithmetic kernels: residues mod p^N, cyclotomic integers,
Howell row spaces over Z/p^N, and deterministic finite fields."""

from .residue import ResidueInt, egcd, inverse_mod, p_valuation
from .cyclotomic import (
    CycloElt,
    CyclotomicInt,
    cyclotomic_polynomial,
    euler_phi,
)
from .linalg import HowellBasis, det_mod, solve_unit_system
from .finitefield import FFElt, FiniteField

__all__ = [
    "ResidueInt",
    "egcd",
    "inverse_mod",
    "p_valuation",
    "CyclotomicInt",
    "CycloElt",
    "cyclotomic_polynomial",
    "euler_phi",
    "HowellBasis",
    "det_mod",
    "solve_unit_system",
    "FFElt",
    "FiniteField",
]
