"""Kernel matrix linear algebra driven by kernel density estimation queries."""

from ._core import (
    KernelFamily,
    KernelSpec,
    exact_matvec,
    exact_sum,
    exact_top_eig,
    kernel_eval,
    nonneg_mvp,
    kernel_matmul,
    quadform,
    top_eigenpair,
    kernel_sum,
    kernel_sum_median,
    submatrix_sum_estimator,
    generate_dp_dataset,
    adversary_stagnation_check,
    adversary_iteration_lb_check,
    adversary_signed_noise_demo,
    run_experiment,
)

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "exact_matvec",
    "exact_sum",
    "exact_top_eig",
    "kernel_eval",
    "nonneg_mvp",
    "kernel_matmul",
    "quadform",
    "top_eigenpair",
    "kernel_sum",
    "kernel_sum_median",
    "submatrix_sum_estimator",
    "generate_dp_dataset",
    "adversary_stagnation_check",
    "adversary_iteration_lb_check",
    "adversary_signed_noise_demo",
    "run_experiment",
]
