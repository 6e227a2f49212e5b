import numpy as np
import pytest
import sympy

from relkit import relation as rl
from relkit import subspace as sp

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def r3():
    """Graph spanned by (e1, k2) and (0, k1): dom = span e1, mul = span k1."""
    return rl.from_graph_span([(1, 0, 0, 1), (0, 0, 1, 0)], 2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- exact oracles ----------------------------------------------------------------
# Small integer examples are recomputed with rational arithmetic so that the
# expected subspaces never come from the floating-point code under test.

def exact_nullspace(rows, ncols):
    m = sympy.Matrix(rows) if rows else sympy.zeros(0, ncols)
    if m.rows == 0:
        return [sympy.eye(ncols)[:, i] for i in range(ncols)]
    return m.nullspace()


def to_subspace(vectors, n):
    if not vectors:
        return sp.Subspace.zero(n)
    return sp.span([np.array(v, dtype=float).ravel() for v in vectors], ambient_dim=n)


def exact_adjoint_generators(gens, dim_h, dim_k):
    """Generators (k, h) of {(k, h) : <k, g'> = <h, f> for all (f, g')}."""
    # unknown vector is (k, h); row . (k, h) = <g', k> - <f, h>
    rows = [list(sympy.Matrix(g[dim_h:])) + list(-sympy.Matrix(g[:dim_h])) for g in gens]
    return [list(v) for v in exact_nullspace(rows, dim_k + dim_h)]


def exact_mul(gens, dim_h, dim_k):
    """{g : (0, g) in span(gens)} by rational elimination."""
    if not gens:
        return []
    a = sympy.Matrix(gens).T  # columns are generators
    coeffs = a[:dim_h, :].nullspace()
    return [list(a[dim_h:, :] * c) for c in coeffs]


def as_relation(gens, dim_h, dim_k):
    return rl.from_graph_span([np.array(g, dtype=float) for g in gens], dim_h, dim_k)
