"""relkit: linear relations, Lebesgue decompositions and domination in finite dimension."""

from .subspace import DEFAULT_TOL, Subspace, ToleranceConfig, span
from .relation import (
    LinearRelation,
    adjoint,
    dom,
    from_graph_span,
    from_operator,
    gram,
    inverse,
    ker,
    mul,
    product_space,
    ran,
    rel_product,
    rel_sum,
)

__version__ = "0.1.0"
