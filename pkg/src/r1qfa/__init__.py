"""Recognizability of R-trivial idempotent languages by decide-and-halt automata.

The pipeline: an :class:`R1Language` yields an inequality system
(:func:`build_system`), whose consistency is decided exactly by a bounded
linear program (:func:`decide_consistency`).  A consistent solution drives
the constructions of probabilistic, doubly stochastic and unitary automata,
which the simulators then check against the language.
"""
from .band import (
    Alphabet,
    R1Language,
    all_words,
    enumerate_band,
    member,
    omega,
    semilattice_levels,
    tau,
    theta_expand,
)
from .system import P1, P2, X0, Constraint, InequalitySystem, VarKey, X, Y, build_system, evaluate, expression_for, validate_assignment
from .lp import LpOutcome, LpProblem, boxify, decide_consistency, solve
from .automata import DhPra, Mmqfa, ProbAutomaton, StatePartition, complement
from .construct import (
    BirkhoffDecomposition,
    alpha,
    birkhoff,
    build_composite,
    build_dhpra,
    build_dhpra_level,
    build_level_automaton,
    build_mmqfa,
    build_mmqfa_level,
    default_n,
    h_matrix,
    lift_to_bqfa,
)
from .probsim import HaltingDistribution, RecognitionReport, accept_probabilities, run_dhpra, run_prob, simulate, verify_recognition
from .quantum import (
    CpMap,
    MmBqfa,
    channel_predicates,
    is_positive,
    mmqfa_as_bqfa,
    omega_limit,
    run_mmbqfa,
    run_mmqfa,
    run_mobqfa,
    superoperator,
    verify_bist_ej,
)
from .forbidden import ForbiddenWitness, check_witness, find_forbidden

__version__ = "0.1.0"
