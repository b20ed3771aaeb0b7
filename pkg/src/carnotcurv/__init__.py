"""Curvature of left-invariant metrics on Carnot and Heintze groups."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraError,
    CarnotAlgebra,
    HeintzeAlgebra,
    NotNilpotentError,
    Stratification,
    StructureConstants,
    bracket,
    heintze_extension,
    jacobi_residual,
    lower_central_series,
    rationality_check,
    standard_dilation,
    validate_stratification,
)
from .catalog import abelian, heis, make_catalog, sc_nilradical  # noqa: E402
from .chart import (  # noqa: E402
    bergman_ch2_field,
    chart_sectional,
    cross_check_base_point,
    horocyclic_field,
    verify_bergman,
)
from .curvature import (  # noqa: E402
    eh_decomposition,
    eh_sectional_horizontal,
    eh_sectional_mixed,
    lemma_pi_audit,
    milnor_sectional,
    nabla,
    pinching_report,
    ricci_scalar,
    riemann,
    sectional,
)
from .metric import (  # noqa: E402
    build_h_metric,
    gromov_bounds,
    sc_spech_gram,
    scale_to_gromov,
    validate_metric,
)
