"""Levy-type processes with discontinuous characteristics: symbols, generators, simulation, checks."""

from .approximation import (
    ApproximationSchedule,
    ExceptionalSets,
    GlueWeights,
    MollifiedAlpha,
    build_exceptional_sets,
    glued_approx_symbol,
    mollify_alpha,
    select_schedule,
)
from .diagnostics import (
    ConditionReport,
    MartingaleTestReport,
    check_symbol_conditions,
    exit_probability_check,
    hartman_wintner,
    martingale_defect,
    martingale_defects,
    transition_density_bound,
)
from .levy_core import (
    AtomicJumps,
    CompoundPoissonJumps,
    LevyTriplet,
    NoJumps,
    StabilityIndexFn,
    StableJumps,
    SymbolFn,
    TemperedStableJumps,
    levy_symbol,
    stable_like_symbol,
    stable_normalizer,
)
from .operators import (
    Bump,
    GluedApproxSpec,
    GluedSpec,
    LevySpec,
    StableLikeApproxSpec,
    StableLikeSpec,
    apply_generator,
    apply_generator_fourier,
    apply_generator_integral,
    canonical_bumps,
    generator_difference_sup,
)
from .simulation import (
    PathEnsemble,
    sample_stable,
    simulate_glued_sde,
    simulate_levy_paths,
    simulate_stable_like,
)

__version__ = "0.1.0"
