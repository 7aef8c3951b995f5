"""Grassmann algebra, supermatrices, super projective points and balancing."""

__version__ = "0.1.0"

from .grassmann import (  # noqa: F401
    AlgebraContext,
    ContextMismatch,
    DomainError,
    GrassmannError,
    Multivector,
    NonInvertible,
    ParityError,
    analytic_apply,
    berezin,
    body,
    conjugate,
    invert,
    mul,
)
from .supermatrix import SuperMatrix, act, berezinian, dagger, is_unitary, matmul, sl11_check, u11_element  # noqa: F401
from .projective import (  # noqa: F401
    AffineChartPoint,
    ProjectivePoint,
    change_chart,
    evaluate_constraint,
    fs_b_matrix,
    fs_potential,
    normalize,
    projectively_equal,
    section_fs_potential,
    super_norm,
    veronese_map,
)
from .integrate import (  # noqa: F401
    QuadratureError,
    QuadratureSpec,
    SuperIntegrand,
    berezin_point_integrate,
    cy_integrate_p12,
    plane_quadrature,
)
from .balance import (  # noqa: F401
    BalanceReport,
    PointEmbedding,
    SectionScaling,
    balance_residual_points,
    moment_matrix_point,
    mv_blocks_cy,
    solve_cy_balance,
    solve_point_balance,
    su_block_point,
)
