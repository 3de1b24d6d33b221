"""Python bindings for the a2c decision pipeline."""

from ._core import (
    ClassifierModel,
    Dataset,
    Partition,
    RejectorModel,
    __version__,
    coex_success_rate,
    expected_grid_oracle,
    fit_classifier,
    fit_rejector,
    gaussian_dataset,
    load_dataset,
    load_model,
    micro_f1,
    partition,
    resolve_probability,
    run_belief_loop,
    run_command,
    run_grid,
    save_model,
    score_outcome,
)

__all__ = [
    "ClassifierModel",
    "Dataset",
    "Partition",
    "RejectorModel",
    "__version__",
    "coex_success_rate",
    "expected_grid_oracle",
    "fit_classifier",
    "fit_rejector",
    "gaussian_dataset",
    "load_dataset",
    "load_model",
    "micro_f1",
    "partition",
    "resolve_probability",
    "run_belief_loop",
    "run_command",
    "run_grid",
    "save_model",
    "score_outcome",
]
