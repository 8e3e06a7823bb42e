"""Multi-task episodic RL simulator: thin wrapper over the C++ core."""

from ._mtrl import (
    Instance,
    RegretLog,
    brute_force_optimal,
    check_regret_decomposition,
    gaps,
    generate,
    instance_from_json,
    load_instance,
    measure_dissimilarity,
    optimal_values,
    policy_value,
    run,
    run_experiment,
    save_instance,
    subpar_set,
    thread_budget,
    validate,
    verify_lemma1,
    verify_lemma2,
)

__all__ = [
    "Instance",
    "RegretLog",
    "brute_force_optimal",
    "check_regret_decomposition",
    "gaps",
    "generate",
    "instance_from_json",
    "load_instance",
    "measure_dissimilarity",
    "optimal_values",
    "policy_value",
    "run",
    "run_experiment",
    "save_instance",
    "subpar_set",
    "thread_budget",
    "validate",
    "verify_lemma1",
    "verify_lemma2",
]

__version__ = "0.1.0"
