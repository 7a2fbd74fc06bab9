"""Complex Ornstein-Uhlenbeck kernels, semigroups, resolvents and bound constants."""

from ._core import (
    Error,
    GridSpec,
    SpectralQuantities,
    System,
    apply_resolvent,
    apply_semigroup,
    bound_C,
    chapman_kolmogorov_residual,
    cube_grid,
    eval_bounds_csv,
    gamma,
    gauss_2f1,
    heat_kernel,
    heat_system,
    kernel_K,
    kernel_Ki,
    kernel_Kji,
    kummer_1f1,
    load_system,
    make_system,
    parse_grid,
    resolvent_of_constant,
    riccati_residual,
    scalar_system,
    spectral_quantities,
    suite_names,
    system_from_json,
    verify,
    weighted_kernel_l1,
    weighted_norm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
