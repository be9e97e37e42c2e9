"""iwacong: exact finite-level group-ring congruence toolkit.

Trace ideals in (Z/p^N)[A] with canonical Howell bases, transfer and
norm maps, diagonal restriction of expansions indexed by totally
positive algebraic integers, local coefficient constructors with
stability recomputation, residue-symbol verification over explicit
finite fields, and multi-level patching condition checks.
"""

__version__ = "0.1.0"
