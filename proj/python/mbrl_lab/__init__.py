"""Exact and sampled model-learning diagnostics on finite MDPs."""

from ._core import (
    CertificateError,
    ConvergenceError,
    Dataset,
    InputError,
    Mdp,
    Policy,
    SizeError,
    builtin_mdp,
    certificates,
    counterexample_names,
    dataset_detection_probability,
    distinguishing_probability,
    expected_mle_loss,
    expected_return,
    mle_loss,
    pinsker_check,
    plan_optimal,
    reward_prediction_loss_empirical,
    reward_prediction_loss_expected,
    run_cli,
    sample_trajectories,
    sample_tuples,
    search_encoders,
    simulation_lemma_terms,
    state_action_coverage,
    trajectory_coverage,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
