"""Close-pair U-statistic estimation of entropy-type integral functionals."""

from .functionals import (
    D2_COEFFS,
    FunctionalOrder,
    QEstimate,
    QuadraticCoefficients,
    estimate_d2,
    estimate_ds,
    estimate_entropy_h,
    estimate_q_tilde,
    estimate_quadratic,
    estimate_rs,
)
from .inference import (
    DegenerateVarianceError,
    Interval,
    QHatTable,
    ScheduleSpec,
    TestReport,
    VariancePlugins,
    confidence_interval,
    entropy_interval,
    epsilon_schedule,
    eta_plugin,
    one_sample_plugins,
    qhat_table,
    simultaneous_d2,
    two_sample_test,
    variance_plugins,
    w_squared,
    zeta_plugin,
)
from .sampling import (
    DistributionSpec,
    Normal,
    StudentT,
    Uniform,
    draw,
    parse_spec,
    true_d2,
    true_entropy,
    true_q,
    true_quadratic,
)
from .spatial import (
    KERNEL_NAME,
    GridIndex,
    NeighborCounts,
    as_sample,
    ball_volume,
    count_cross,
    count_radius_bruteforce,
    count_within,
)
from .stats_util import (
    KsReport,
    Summary,
    ks_test_standard_normal,
    normal_cdf,
    normal_quantile,
    summarize,
)

__version__ = "0.1.0"
