"""gridmind: a tabular gridworld agent that keeps a frustration ledger.

The agent combines habit learning (TD on state/action values), deliberate
planning (goal suggestion, commitment, value-guided search), replay and
wandering, and interrupt machinery. Every shortfall between expected and
obtained reward is scored through one multiplicative equation and logged;
named interventions scale the equation's terms or the schedulers, and the
harness measures how much total frustration each one removes.
"""

from .harness import RunConfig, VERSION, experiment, load_config, run
from .interventions import InterventionConfig, canonical_suite
from .suffering import FrustrationEvent, Ledger, Source, Timescale, evaluate
from .values import LearningParams, ValueStore, reward_loss, td_error, value_iteration
from .world import Action, WorldModel, load_world

__version__ = VERSION

__all__ = [
    "Action",
    "FrustrationEvent",
    "InterventionConfig",
    "Ledger",
    "LearningParams",
    "RunConfig",
    "Source",
    "Timescale",
    "ValueStore",
    "VERSION",
    "WorldModel",
    "canonical_suite",
    "evaluate",
    "experiment",
    "load_config",
    "load_world",
    "reward_loss",
    "run",
    "td_error",
    "value_iteration",
]
