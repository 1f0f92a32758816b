"""Simulation and exact analysis of SSWM and the (1+1) EA on pseudo-Boolean benchmarks."""

from .dynamics import Algorithm, AlgorithmConfig, RunResult, accept, run, stream
from .fitness import Problem, balance, cliff, leading_ones, onemax
from .mutation import MutationKind, jump_matrix, mut_exact, mut_upper_bound, mutate
from .selection import SelectionParams, nbeta_threshold, p_fix, p_fix_bounds

__version__ = "0.1.0"
