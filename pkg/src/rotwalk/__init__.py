"""rotwalk: a numerical laboratory for coupled rotational random walks.

Simulates the walk family S_n(theta) = sum_j U_j exp(2i*pi*j*theta) driven
by one rotationally symmetric increment stream, checks Monte Carlo tail
frequencies against exact Gaussian oracles, and estimates the dimension of
exceptional-angle sets through dyadic circled trees, count slopes, and
Frostman-measure energies.
"""

from .angular import (
    AngularEstimate,
    GapEstimate,
    WindowSpec,
    mc_angular_exceedance,
    mc_time_gap_exceedance,
    mc_time_increment_tail,
    taylor_tail_bound,
)
from .deviations import (
    BernsteinParams,
    DirectionalParams,
    TailEstimate,
    bernstein_bound,
    decorrelation_curve,
    directional_bound,
    mc_joint,
    mc_smoothed,
    mc_tail,
)
from .increments import (
    ComplexGaussian,
    RadialExp,
    SeedSpec,
    UnitCircle,
    ZeroLaw,
    parse_law,
    sample_increments,
    sigma,
)
from .oracle import (
    complex_normal_abs_tail,
    derivative_variance,
    dirichlet_kernel,
    joint_tail,
    joint_tail_envelope,
    single_tail,
    smoothed_expectation,
    time_increment_tail,
)
from .plateau import PlateauSpec, plateau_eval
from .tree import (
    CircledTree,
    DyadicMeasure,
    TreeConfig,
    bernoulli_forest,
    build_forest,
    build_frostman_measure,
    build_tree,
    count_circled,
    dimension_slope,
    gamma_energy,
    mean_counts,
    moment_stats,
    subtree_sum,
    variance_ratio_profile,
)
from .walk import (
    DyadicGrid,
    ThresholdSpec,
    TimeSchedule,
    eval_derivative,
    eval_grid_fft,
    eval_point,
    sup_window,
    threshold,
)

__version__ = "0.1.0"
