"""
Assembly and solution of the discrete Dirichlet problem

The operator is discretized with cell-vertex finite differences: face
conductances use the harmonic mean of the node weights D^m (m = d+1-n)
times the diagonal coefficient at the face midpoint, and off-diagonal
coefficients enter through centered cross stencils. Rows exist for the
active nodes only; every other node supplies Dirichlet data.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from ..constants import DEFAULT_MAX_ITERATIONS, DEFAULT_SOLVER_TOLERANCE, POLE_MIN_SPACINGS
from ..exceptions import (
    ConvergenceError,
    ParameterError,
    PlacementError,
    TrivialityError,
)
from ..geometry.domain import DomainBox
from ..models.reports import SolveReport
from ..smoothdist.field import SmoothDistanceField
from .grid import GridField, NodeKind
from .operator import OperatorSpec

logger = logging.getLogger(__name__)

# D is clamped here before negative powers are taken
D_FLOOR = 1e-300


@dataclass(eq=False)
class DiscreteSystem:
    """Sparse system on the active nodes of a template"""

    spec: OperatorSpec
    template: GridField = field(repr=False)
    matrix: sp.csr_matrix = field(repr=False)
    coupling: sp.csr_matrix = field(repr=False)
    active: np.ndarray = field(repr=False)
    node_distance: np.ndarray | None = field(repr=False)
    node_weight: np.ndarray = field(repr=False)
    m_matrix: bool = True
    ellipticity: tuple[float, float] = (1.0, 1.0)

    @property
    def unknowns(self) -> int:
        return int(self.active.sum())

    @property
    def active_flat(self) -> np.ndarray:
        return np.flatnonzero(self.active.reshape(-1))

    @property
    def fixed_flat(self) -> np.ndarray:
        return np.flatnonzero(~self.active.reshape(-1))

    def apply(self, values: np.ndarray) -> np.ndarray:
        """(L u) on active nodes, NaN elsewhere"""
        flat = np.asarray(values, dtype=float).reshape(-1)
        out = np.full(self.template.size, np.nan)
        out[self.active_flat] = self.matrix @ flat[self.active_flat] + self.coupling @ flat[self.fixed_flat]
        return out.reshape(self.template.shape)


def _node_distance(template: GridField, field_: SmoothDistanceField) -> np.ndarray:
    """D_beta at every node; analytic fallback where the sample is too close"""
    D = field_.evaluate(template.nodes, 0, on_close="nan").D
    fallback = template.delta.reshape(-1) * field_.plane_gradient
    D = np.where(np.isfinite(D), D, fallback)
    return D.reshape(template.shape)


def _offset_indices(P: np.ndarray, offset: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    return np.ravel_multi_index(tuple((P + offset).T), shape)


def assemble(
    spec: OperatorSpec,
    template: GridField,
    field_: SmoothDistanceField,
    active: np.ndarray | None = None,
) -> DiscreteSystem:
    """
    Assemble L = -div(D^(d+1-n) A grad) on the template's lattice.

    Args:
        spec: Operator (beta, d, n) and coefficient field
        template: Lattice with node roles
        field_: Smooth distance providing the weight
        active: Optional subset of interior nodes carrying unknowns

    Returns:
        DiscreteSystem with the interior matrix and the Dirichlet coupling
    """
    if template.n != spec.n:
        raise ParameterError("Operator and grid dimensions differ", "n", spec.n)
    interior = template.interior
    active = interior if active is None else np.asarray(active, dtype=bool) & interior
    if not np.any(active):
        raise ParameterError("No active interior nodes to assemble")

    n, h, shape = spec.n, template.h, template.shape
    coefficients = spec.coefficients
    assert coefficients is not None
    m = spec.weight_exponent

    D = None
    if math.isclose(m, 0.0):
        weight = np.ones(shape)
        inv_weight = np.ones(shape)
    else:
        D = _node_distance(template, field_)
        Dc = np.maximum(D, D_FLOOR)
        weight = Dc**m
        inv_weight = Dc ** (-m)

    P = np.argwhere(active)
    rows_flat = np.ravel_multi_index(tuple(P.T), shape)
    X = template.domain.lower + h * P
    inv_w = inv_weight[tuple(P.T)]
    ellipticity = spec.ellipticity(X)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    diagonal = np.zeros(len(P))

    for k in range(n):
        e = np.zeros(n, dtype=int)
        e[k] = 1
        for sign in (1, -1):
            q = _offset_indices(P, sign * e, shape)
            inv_q = inv_weight.reshape(-1)[q]
            face_weight = 2.0 / (inv_w + inv_q)
            midpoint = X + 0.5 * sign * h * e
            a_kk = coefficients.matrix(midpoint)[:, k, k]
            conductance = face_weight * a_kk / h**2
            diagonal += conductance
            rows.append(rows_flat)
            cols.append(q)
            vals.append(-conductance)

    if not coefficients.is_diagonal():
        A_nodes = coefficients.matrix(template.nodes).reshape(*shape, n, n)
        w_flat = weight.reshape(-1)
        for k in range(n):
            for j in range(k + 1, n):
                b = w_flat * A_nodes[..., k, j].reshape(-1)
                ek = np.zeros(n, dtype=int)
                el = np.zeros(n, dtype=int)
                ek[k] = 1
                el[j] = 1

                def bat(offset: np.ndarray, b: np.ndarray = b) -> np.ndarray:
                    return b[_offset_indices(P, offset, shape)]

                stencil = [
                    (ek + el, -(bat(ek) + bat(el))),
                    (-ek - el, -(bat(-ek) + bat(-el))),
                    (ek - el, bat(ek) + bat(-el)),
                    (-ek + el, bat(-ek) + bat(el)),
                ]
                for offset, coefficient in stencil:
                    rows.append(rows_flat)
                    cols.append(_offset_indices(P, offset, shape))
                    vals.append(coefficient / (4.0 * h**2))

    rows.append(rows_flat)
    cols.append(rows_flat)
    vals.append(diagonal)

    size = template.size
    full = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()
    active_flat = np.flatnonzero(active.reshape(-1))
    fixed_flat = np.flatnonzero(~active.reshape(-1))
    block = full[active_flat]
    matrix = block[:, active_flat].tocsr()
    coupling = block[:, fixed_flat].tocsr()

    off = matrix - sp.diags(matrix.diagonal())
    m_matrix = bool((off.data <= 1e-14 * np.abs(diagonal).max()).all()) and bool(
        (coupling.data <= 1e-14 * np.abs(diagonal).max()).all()
    )
    if not m_matrix:
        logger.warning(
            "Discrete operator for %s coefficients is not an M-matrix; "
            "maximum principle and positivity are not guaranteed",
            coefficients.name,
        )
    logger.info(
        "Assembled %d unknowns (n=%d, d=%g, m=%g, h=%g, nnz=%d)",
        len(active_flat),
        n,
        spec.d,
        m,
        h,
        matrix.nnz,
    )
    return DiscreteSystem(
        spec=spec,
        template=template,
        matrix=matrix,
        coupling=coupling,
        active=active,
        node_distance=D,
        node_weight=weight,
        m_matrix=m_matrix,
        ellipticity=ellipticity,
    )


def solve_dirichlet(
    system: DiscreteSystem,
    boundary_values: np.ndarray | None = None,
    source: np.ndarray | None = None,
    tolerance: float = DEFAULT_SOLVER_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> tuple[GridField, SolveReport]:
    """
    Solve L u = source on active nodes with u = boundary_values elsewhere.

    Uses Jacobi-preconditioned conjugate gradients with a relative
    residual stopping rule.
    """
    if tolerance <= 0:
        raise ParameterError("Solver tolerance must be positive", "tolerance", tolerance)
    template = system.template
    shape = template.shape
    bv = np.zeros(shape) if boundary_values is None else np.asarray(boundary_values, dtype=float)
    f = np.zeros(shape) if source is None else np.asarray(source, dtype=float)
    if bv.shape != shape or f.shape != shape:
        raise ParameterError("Boundary values and source must match the lattice")

    active_flat, fixed_flat = system.active_flat, system.fixed_flat
    fixed = bv.reshape(-1)[fixed_flat]
    b = f.reshape(-1)[active_flat] - system.coupling @ fixed
    A = system.matrix
    b_norm = float(np.linalg.norm(b))

    history: list[float] = []
    if b_norm == 0.0:
        x = np.zeros(len(active_flat))
        info = 0
    else:
        inv_diag = 1.0 / A.diagonal()
        preconditioner = LinearOperator(A.shape, matvec=lambda v: inv_diag * v, dtype=float)

        def record(xk: np.ndarray) -> None:
            history.append(float(np.linalg.norm(b - A @ xk)) / b_norm)

        x, info = cg(
            A,
            b,
            rtol=tolerance,
            atol=0.0,
            maxiter=max_iterations,
            M=preconditioner,
            callback=record,
        )
    if info != 0:
        raise ConvergenceError(
            f"Conjugate gradients stopped after {len(history)} iterations above tolerance {tolerance:g}",
            residual_history=history,
            suggestion="Raise max_iterations or coarsen the grid",
        )

    r = b - A @ x
    residual = float(np.linalg.norm(r)) / b_norm if b_norm else 0.0
    w = system.node_weight.reshape(-1)[active_flat]
    wb = float(np.linalg.norm(b / w))
    weighted = float(np.linalg.norm(r / w)) / wb if wb else 0.0

    values = bv.reshape(-1).copy()
    values[active_flat] = x
    values[template.mask.reshape(-1) == NodeKind.EXTERIOR] = 0.0
    values = values.reshape(shape)

    scale = float(np.abs(x).max()) if x.size else 0.0
    positive = bool(np.all(x >= -max(tolerance * scale, 1e-300))) if scale else True
    if not positive and system.m_matrix and np.all(f >= 0) and np.all(fixed >= 0):
        logger.warning("Negative values in a solve with nonnegative data")

    report = SolveReport(
        residual=residual,
        weighted_residual=weighted,
        iterations=len(history),
        solver="cg-jacobi",
        tolerance=tolerance,
        positive=positive,
        m_matrix=system.m_matrix,
        unknowns=len(active_flat),
    )
    logger.info("Solved %d unknowns in %d iterations, residual %.3e", report.unknowns, report.iterations, residual)
    solution = template.with_values(values, valid=template.mask != NodeKind.EXTERIOR, solve=report.to_dict())
    return solution, report


def green_function(
    system: DiscreteSystem,
    pole: np.ndarray,
    tolerance: float = DEFAULT_SOLVER_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    outer_data: np.ndarray | None = None,
) -> tuple[GridField, SolveReport]:
    """
    Discrete Green function with a unit nodal load at the pole.

    The pole must be an active node with delta >= 8h. outer_data, when
    given, supplies values on the outer box face instead of zero.
    """
    template = system.template
    pole = np.asarray(pole, dtype=float)
    try:
        index = template.nearest_index(pole)
    except ParameterError as exc:
        raise PlacementError("Pole lies outside the grid", context={"pole": pole.tolist()}) from exc
    node = template.node(index)
    if not system.active[index]:
        raise PlacementError(
            f"Pole node {node.tolist()} is not an interior node",
            context={"pole": pole.tolist(), "kind": NodeKind(int(template.mask[index])).name},
        )
    if template.delta[index] < POLE_MIN_SPACINGS * template.h:
        raise PlacementError(
            f"Pole node is within {POLE_MIN_SPACINGS:g}h of the boundary",
            context={"pole": pole.tolist(), "delta": float(template.delta[index])},
            suggestion="Refine the grid or move the pole away from the boundary",
        )

    source = np.zeros(template.shape)
    source[index] = 1.0 / template.h**template.n
    bv = None
    if outer_data is not None:
        bv = np.where(template.delta < template.h_bc, 0.0, np.asarray(outer_data, dtype=float))
    solution, report = solve_dirichlet(system, bv, source, tolerance, max_iterations)
    solution.metadata["pole"] = node.tolist()
    solution.metadata["pole_index"] = list(index)
    return solution, report


def _sample_data(template: GridField, data) -> np.ndarray:
    if callable(data):
        return template.sample_function(data)
    values = np.asarray(data, dtype=float)
    if values.shape != template.shape:
        raise ParameterError("Outer data must match the lattice")
    return values


def solve_boundary_ball(
    spec: OperatorSpec,
    template: GridField,
    field_: SmoothDistanceField,
    x: np.ndarray,
    r: float,
    outer_data,
    tolerance: float = DEFAULT_SOLVER_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> tuple[GridField, SolveReport]:
    """
    Positive solution of Lu = 0 in Omega ∩ B(x, 2r), vanishing on the boundary.

    outer_data (callable or lattice array) gives the values taken outside
    the ball; nodes in the Dirichlet band are clamped to zero.
    """
    x = np.asarray(x, dtype=float)
    if r <= 0:
        raise ParameterError("Ball radius must be positive", "r", r)
    domain: DomainBox = template.domain
    if np.any(x - 2 * r < domain.lower) or np.any(x + 2 * r > domain.upper):
        raise ParameterError(
            "B(x, 2r) must lie within the grid box",
            "r",
            r,
            context={"center": x.tolist()},
        )
    data = _sample_data(template, outer_data)
    inside_ball = np.linalg.norm(template.nodes - x, axis=1).reshape(template.shape) < 2 * r
    active = template.interior & inside_ball
    system = assemble(spec, template, field_, active=active)

    fixed = ~system.active
    band = template.delta < template.h_bc
    bv = np.where(band, 0.0, data)
    coupled = np.zeros(template.size, dtype=bool)
    coupled[system.fixed_flat[np.unique(system.coupling.indices)]] = True
    coupled = coupled.reshape(template.shape) & fixed & ~band
    if np.any(bv[coupled] < 0):
        raise ParameterError("Outer data must be nonnegative", "outer_data")
    if not np.any(bv[coupled] > 0):
        raise TrivialityError(
            "Outer data vanish on the whole ball boundary",
            context={"center": x.tolist(), "r": r},
        )
    solution, report = solve_dirichlet(system, bv, None, tolerance, max_iterations)
    solution.metadata["ball"] = {"center": x.tolist(), "r": float(r)}
    return solution, report


def reflect(Y: np.ndarray, offset: float = 0.0) -> np.ndarray:
    """Mirror image across the hyperplane t = offset"""
    Y = np.array(Y, dtype=float)
    Y[..., -1] = 2 * offset - Y[..., -1]
    return Y


def images_green(Y: np.ndarray, X: np.ndarray, offset: float = 0.0) -> np.ndarray:
    """
    Green function of -Laplace on the half-space t > offset.

    n = 2: (1/2pi) ln(|X - Y*| / |X - Y|)
    n >= 3: (|X - Y|^(2-n) - |X - Y*|^(2-n)) / ((n-2) |S^(n-1)|)
    """
    Y = np.asarray(Y, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = Y.shape[0]
    r = np.linalg.norm(X - Y, axis=1)
    rbar = np.linalg.norm(X - reflect(Y, offset), axis=1)
    if n == 2:
        return np.log(rbar / r) / (2 * math.pi)
    sphere = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return (r ** (2 - n) - rbar ** (2 - n)) / ((n - 2) * sphere)


def truncation_sensitivity(
    spec: OperatorSpec,
    field_: SmoothDistanceField,
    inner: DomainBox,
    outer: DomainBox,
    h: float,
    pole: np.ndarray,
    tolerance: float = DEFAULT_SOLVER_TOLERANCE,
) -> dict[str, float]:
    """Compare Green functions computed in two nested, aligned boxes"""
    shift = (inner.lower - outer.lower) / h
    if np.any(inner.lower < outer.lower) or np.any(inner.upper > outer.upper):
        raise ParameterError("Inner box must lie inside the outer box")
    if np.any(np.abs(shift - np.rint(shift)) > 1e-9):
        raise ParameterError("Nested boxes must share the lattice", "h", h)

    g_in, _ = green_function(assemble(spec, GridField.template(inner, h), field_), pole, tolerance)
    g_out, _ = green_function(assemble(spec, GridField.template(outer, h), field_), pole, tolerance)

    start = np.rint(shift).astype(int)
    window = tuple(slice(s, s + size) for s, size in zip(start, g_in.shape, strict=True))
    common = g_in.interior
    a = g_in.values[common]
    b = g_out.values[window][common]
    norm = float(np.linalg.norm(b))
    result = {
        "relative_l2": float(np.linalg.norm(a - b)) / norm if norm else 0.0,
        "max_abs": float(np.abs(a - b).max()) if a.size else 0.0,
        "nodes": int(common.sum()),
    }
    logger.info("Truncation sensitivity: %s", result)
    return result


def convergence_order(hs, errors) -> float:
    """Least-squares slope of log error against log h"""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.shape != errors.shape or hs.size < 2:
        raise ParameterError("Need at least two (h, error) pairs")
    if np.any(hs <= 0) or np.any(errors <= 0):
        raise ParameterError("Spacings and errors must be positive")
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)
