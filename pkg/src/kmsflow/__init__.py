"""Equilibrium states of gauge actions on shift-space Cuntz-Pimsner algebras.

Symbolic sequences, the shift cocycle, quasi-invariant measures, the
temperature parameters, factor-type classification and finite Markov
boundaries, with exact rational arithmetic wherever the inputs allow it.
"""

__version__ = "0.1.0"
