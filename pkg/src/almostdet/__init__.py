"""Random almost deterministic automata and the state complexity of their determinization."""

from .core import (
    AlmostDetAutomaton,
    AutomatonError,
    ContractError,
    DomainError,
    ParameterError,
    TransitionStructure,
    accessible_states,
    apply_word,
    image_set,
    reachable_states,
    scc_decompose,
)
from .randgen import gen_almost_det, gen_dense_nfa, gen_structure, make_rng, trial_seed
from .subset import Dfa, accessible_powerset, minimize, state_complexity

__all__ = [
    "AlmostDetAutomaton",
    "AutomatonError",
    "ContractError",
    "Dfa",
    "DomainError",
    "ParameterError",
    "TransitionStructure",
    "accessible_powerset",
    "accessible_states",
    "apply_word",
    "gen_almost_det",
    "gen_dense_nfa",
    "gen_structure",
    "image_set",
    "make_rng",
    "minimize",
    "reachable_states",
    "scc_decompose",
    "state_complexity",
    "trial_seed",
]
