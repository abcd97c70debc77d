from .linalg import eigvalsh, jacobi_eigh, spd_inv, spd_sqrt, symmetrize
from .points import BookletPoint, CirclePoint, EuclideanPoint, SpdMatrix, wrap_angle
from .spaces import (
    SPACES,
    Booklet,
    BuresWasserstein,
    Circle,
    Euclidean,
    MetricSpace,
    from_paper_tangent,
    get_space,
    paper_exp_identity,
    paper_log_identity,
    to_paper_tangent,
)
