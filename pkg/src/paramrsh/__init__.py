"""Randomized search heuristics with parameterized runtime guarantees.

Subpackages cover maximum-leaf spanning trees, vertex cover, monotone
submodular maximisation under matroid constraints and Euclidean TSP, plus an
experiment harness and exact oracles for validating them on small inputs.
"""

from .engine import Budget, RngStream, Trajectory, run_until

__all__ = ["Budget", "RngStream", "Trajectory", "run_until"]
__version__ = "0.1.0"
