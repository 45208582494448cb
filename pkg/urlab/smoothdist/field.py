"""
Smooth distance D_beta and its derivatives

R_beta(X) = sum_i w_i |X - y_i|^(-d-beta) over the quadrature atoms, plus
the analytic contribution of a flat tail when the sample carries one.
D_beta = R_beta^(-1/beta). Derivatives are exact derivatives of the atom
sum, propagated by the chain rule.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ..constants import (
    C_BETA_RTOL,
    DEFAULT_BETA,
    DEFAULT_OPENING_ANGLE,
    DEFAULT_TREE_TOLERANCE,
    DIRECT_CHUNK,
    PROBE_MIN_SPACINGS,
    TREE_LEAF_SIZE,
    TREE_NEAR_ATOMS,
)
from ..exceptions import ParameterError, ResolutionError
from ..geometry.boundary import BoundarySample, dist_to_boundary
from ..geometry.oracles import FlatTail

logger = logging.getLogger(__name__)

PROBE_CHUNK = 256


def c_beta(d: float, beta: float) -> float:
    """
    c_beta = integral over R^d of (1 + |y|^2)^(-(d+beta)/2) dy.

    Computed by radial reduction to a one-dimensional quadrature.
    """
    if beta <= 0:
        raise ParameterError("beta must be positive", "beta", beta)
    if d <= 0:
        raise ParameterError("d must be positive", "d", d)
    sphere = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
    exponent = -(d + beta) / 2

    def radial(r: float) -> float:
        return r ** (d - 1) * (1.0 + r * r) ** exponent

    head, _ = integrate.quad(radial, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(radial, 1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    value = sphere * (head + tail)
    closed = c_beta_closed_form(d, beta)
    if abs(value - closed) > C_BETA_RTOL * closed:
        logger.warning("c_beta quadrature %.15g differs from closed form %.15g", value, closed)
    return value


def c_beta_closed_form(d: float, beta: float) -> float:
    """pi^(d/2) Gamma(beta/2) / Gamma((d+beta)/2)"""
    return math.pi ** (d / 2) * math.gamma(beta / 2) / math.gamma((d + beta) / 2)


@dataclass
class SmoothDistanceValues:
    """R_beta, D_beta and requested derivatives at a batch of probes"""

    R: np.ndarray
    D: np.ndarray
    grad_R: np.ndarray | None = None
    hess_R: np.ndarray | None = None
    grad_D: np.ndarray | None = None
    hess_D: np.ndarray | None = None

    def __getitem__(self, row: int) -> "SmoothDistanceValues":
        pick = lambda a: None if a is None else a[row]  # noqa: E731
        return SmoothDistanceValues(
            R=self.R[row],
            D=self.D[row],
            grad_R=pick(self.grad_R),
            hess_R=pick(self.hess_R),
            grad_D=pick(self.grad_D),
            hess_D=pick(self.hess_D),
        )


def _kernel_sums(
    X: np.ndarray, Y: np.ndarray, w: np.ndarray, a: float, order: int
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """sum_j w_j rho^-a and its first two derivatives in X, chunked"""
    p, n = X.shape
    value = np.zeros(p)
    grad = np.zeros((p, n)) if order >= 1 else None
    hess = np.zeros((p, n, n)) if order >= 2 else None
    eye = np.eye(n)
    for i0 in range(0, p, PROBE_CHUNK):
        xs = X[i0 : i0 + PROBE_CHUNK]
        for j0 in range(0, Y.shape[0], DIRECT_CHUNK):
            r = xs[:, None, :] - Y[None, j0 : j0 + DIRECT_CHUNK, :]
            rho2 = np.einsum("pmi,pmi->pm", r, r)
            wk = w[None, j0 : j0 + DIRECT_CHUNK] * rho2 ** (-a / 2)
            value[i0 : i0 + PROBE_CHUNK] += wk.sum(axis=1)
            if order >= 1:
                c1 = -a * wk / rho2
                grad[i0 : i0 + PROBE_CHUNK] += np.einsum("pm,pmi->pi", c1, r)
            if order >= 2:
                c2 = a * (a + 2) * wk / rho2**2
                hess[i0 : i0 + PROBE_CHUNK] += np.einsum("pm,pmi,pmj->pij", c2, r, r)
                hess[i0 : i0 + PROBE_CHUNK] += c1.sum(axis=1)[:, None, None] * eye
    return value, grad, hess


def _half_line(L: np.ndarray, tau: np.ndarray, p: float) -> np.ndarray:
    """G(L, tau; p) = integral from L to infinity of (u^2 + tau^2)^-p du"""
    full = special.beta(p - 0.5, 0.5)
    out = np.empty_like(L)
    flat = tau <= 1e-300
    c = np.where(flat, 0.0, tau**2 / np.where(flat, 1.0, L**2 + tau**2))
    partial = 0.5 * full * special.betainc(p - 0.5, 0.5, c)
    scale = np.where(flat, 1.0, tau) ** (1.0 - 2.0 * p)
    out[:] = scale * np.where(L >= 0, partial, full - partial)
    if np.any(flat):
        out[flat] = np.where(
            L[flat] > 0, L[flat] ** (1.0 - 2.0 * p) / (2.0 * p - 1.0), np.inf
        )
    return out


class _Cluster:
    __slots__ = ("indices", "com", "mass", "radius", "children")

    def __init__(self, points: np.ndarray, weights: np.ndarray, indices: np.ndarray):
        self.indices = indices
        w = weights[indices]
        self.mass = float(w.sum())
        self.com = (points[indices] * w[:, None]).sum(axis=0) / self.mass
        self.radius = float(np.max(np.linalg.norm(points[indices] - self.com, axis=1)))
        self.children: list["_Cluster"] = []
        if indices.size > TREE_LEAF_SIZE:
            local = points[indices]
            axis = int(np.argmax(np.ptp(local, axis=0)))
            order = np.argsort(local[:, axis], kind="stable")
            half = indices.size // 2
            self.children = [
                _Cluster(points, weights, indices[order[:half]]),
                _Cluster(points, weights, indices[order[half:]]),
            ]


class SmoothDistanceField:
    """
    Evaluator of R_beta, D_beta and derivatives up to order 2.

    The cluster tree is shared between fields built with with_beta.
    """

    def __init__(
        self,
        sample: BoundarySample,
        beta: float = DEFAULT_BETA,
        theta: float = DEFAULT_OPENING_ANGLE,
        tolerance: float = DEFAULT_TREE_TOLERANCE,
        use_tree: bool = True,
        _root: _Cluster | None = None,
    ):
        if beta <= 0:
            raise ParameterError("beta must be positive", "beta", beta)
        if not 0 < theta < 1:
            raise ParameterError("Opening angle must lie in (0, 1)", "theta", theta)
        self.sample = sample
        self.beta = float(beta)
        self.theta = float(theta)
        self.tolerance = float(tolerance)
        self.use_tree = use_tree
        self._root = _root
        self.c_beta = c_beta(sample.d, self.beta)

    @property
    def exponent(self) -> float:
        return self.sample.d + self.beta

    @property
    def root(self) -> _Cluster:
        if self._root is None:
            self._root = _Cluster(
                self.sample.points, self.sample.weights, np.arange(self.sample.count)
            )
        return self._root

    def with_beta(self, beta: float) -> "SmoothDistanceField":
        return SmoothDistanceField(
            self.sample,
            beta=beta,
            theta=self.theta,
            tolerance=self.tolerance,
            use_tree=self.use_tree,
            _root=self.root,
        )

    @property
    def plane_gradient(self) -> float:
        """|grad D_beta| on a flat d-plane, c_beta^(-1/beta)"""
        return self.c_beta ** (-1.0 / self.beta)

    def check_resolution(self, X: np.ndarray) -> np.ndarray:
        """Boolean mask of probes too close to the sample to resolve"""
        floor = PROBE_MIN_SPACINGS * self.sample.spacing
        near, _ = self.sample.nearest(X)
        close = near <= floor
        if self.sample.oracle is not None:
            close |= np.asarray(dist_to_boundary(self.sample, X)) <= floor
        return close

    def evaluate(
        self, X: np.ndarray, order: int = 0, on_close: str = "raise"
    ) -> SmoothDistanceValues:
        """
        Evaluate at every row of X.

        on_close="raise" rejects probes within two spacings of the sample;
        on_close="nan" returns NaN rows for them instead.
        """
        if order not in (0, 1, 2):
            raise ParameterError("order must be 0, 1 or 2", "order", order)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        close = self.check_resolution(X)
        if np.any(close) and on_close == "raise":
            row = int(np.flatnonzero(close)[0])
            _, atom = self.sample.nearest(X[row])
            raise ResolutionError(
                f"Probe {X[row].tolist()} is within {PROBE_MIN_SPACINGS} spacings of atom {int(atom[0])}",
                context={"probe": X[row].tolist(), "atom": int(atom[0])},
                suggestion="Move the probe away from the boundary or refine the sample",
            )
        good = ~close
        R = np.full(X.shape[0], np.nan)
        gR = np.full(X.shape, np.nan) if order >= 1 else None
        hR = np.full((*X.shape, X.shape[1]), np.nan) if order >= 2 else None

        if np.any(good):
            v, g, H = (self._tree_sums if self.use_tree else self._direct_sums)(X[good], order)
            if self.sample.tail is not None:
                tv, tg, tH = self._tail_sums(X[good], order)
                v = v + tv
                g = None if g is None else g + tg
                H = None if H is None else H + tH
            R[good] = v
            if gR is not None:
                gR[good] = g
            if hR is not None:
                hR[good] = H
        return self._chain_rule(R, gR, hR)

    def _chain_rule(
        self, R: np.ndarray, gR: np.ndarray | None, hR: np.ndarray | None
    ) -> SmoothDistanceValues:
        b = 1.0 / self.beta
        D = R ** (-b)
        gD = hD = None
        if gR is not None:
            gD = (-b * R ** (-b - 1.0))[:, None] * gR
        if hR is not None and gR is not None:
            hD = (-b * R ** (-b - 1.0))[:, None, None] * hR + (
                b * (b + 1.0) * R ** (-b - 2.0)
            )[:, None, None] * np.einsum("pi,pj->pij", gR, gR)
        return SmoothDistanceValues(R=R, D=D, grad_R=gR, hess_R=hR, grad_D=gD, hess_D=hD)

    def _direct_sums(self, X: np.ndarray, order: int):
        return _kernel_sums(X, self.sample.points, self.sample.weights, self.exponent, order)

    def direct(self, X: np.ndarray, order: int = 0) -> SmoothDistanceValues:
        """Exact atom sum without the tree"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        v, g, H = self._direct_sums(X, order)
        if self.sample.tail is not None:
            tv, tg, tH = self._tail_sums(X, order)
            v = v + tv
            g = None if g is None else g + tg
            H = None if H is None else H + tH
        return self._chain_rule(v, g, H)

    def _tree_sums(self, X: np.ndarray, order: int):
        a = self.exponent
        p, n = X.shape
        value = np.zeros(p)
        grad = np.zeros((p, n)) if order >= 1 else None
        hess = np.zeros((p, n, n)) if order >= 2 else None

        k = min(TREE_NEAR_ATOMS, self.sample.count)
        near_dist, near_idx = self.sample.tree.query(X, k=k)
        near_dist = np.reshape(near_dist, (p, k))
        near_idx = np.reshape(near_idx, (p, k))
        # Lower bound for R from the nearest atoms
        estimate = (self.sample.weights[near_idx] * near_dist ** (-a)).sum(axis=1)
        budget = self.tolerance * estimate / self.sample.total_mass

        def accumulate(rows: np.ndarray, result) -> None:
            v, g, H = result
            value[rows] += v
            if grad is not None:
                grad[rows] += g
            if hess is not None:
                hess[rows] += H

        stack = [(self.root, np.arange(p))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            if not node.children:
                atoms = node.indices
                accumulate(
                    rows,
                    _kernel_sums(
                        X[rows], self.sample.points[atoms], self.sample.weights[atoms], a, order
                    ),
                )
                continue
            reach = np.linalg.norm(X[rows] - node.com, axis=1)
            gap = np.maximum(reach - node.radius, 1e-300)
            # rows inside the bounding sphere get an infinite error and descend
            with np.errstate(over="ignore"):
                error = 0.5 * a * (a + 1) * gap ** (-a - 2) * node.radius**2
            accept = (node.radius < self.theta * reach) & (error <= budget[rows])
            if np.any(accept):
                accumulate(
                    rows[accept],
                    _kernel_sums(X[rows[accept]], node.com[None, :], np.array([node.mass]), a, order),
                )
            rest = rows[~accept]
            for child in node.children:
                stack.append((child, rest))
        return value, grad, hess

    def _tail_sums(self, X: np.ndarray, order: int):
        tail = self.sample.tail
        assert tail is not None
        p = (self.exponent) / 2
        n = X.shape[1]
        e = tail.direction
        rel = X - tail.origin
        s = rel @ e
        perp = rel - s[:, None] * e
        tau = np.linalg.norm(perp, axis=1)
        nu = perp / np.where(tau > 0, tau, 1.0)[:, None]

        value = np.zeros(X.shape[0])
        grad = np.zeros_like(X) if order >= 1 else None
        hess = np.zeros((X.shape[0], n, n)) if order >= 2 else None
        normal_part = np.eye(n) - np.outer(e, e)

        for L, dL in ((tail.stop - s, -e), (s - tail.start, e)):
            value += _half_line(L, tau, p)
            if order >= 1:
                base = (L**2 + tau**2) ** (-p)
                G_L = -base
                G_t = -2 * p * tau * _half_line(L, tau, p + 1)
                grad += G_L[:, None] * dL + G_t[:, None] * nu
            if order >= 2:
                base1 = (L**2 + tau**2) ** (-p - 1)
                G_LL = 2 * p * L * base1
                G_Lt = 2 * p * tau * base1
                G_tt = -2 * p * _half_line(L, tau, p + 1) + 4 * p * (p + 1) * tau**2 * _half_line(
                    L, tau, p + 2
                )
                dLdL = np.outer(dL, dL)
                cross = np.einsum("i,pj->pij", dL, nu)
                nunu = np.einsum("pi,pj->pij", nu, nu)
                curvature = (normal_part[None] - nunu) / tau[:, None, None]
                hess += (
                    G_LL[:, None, None] * dLdL
                    + G_Lt[:, None, None] * (cross + np.transpose(cross, (0, 2, 1)))
                    + G_tt[:, None, None] * nunu
                    + G_t[:, None, None] * curvature
                )
        return value, grad, hess

    def truncated_R(self, X: np.ndarray, radius: np.ndarray) -> np.ndarray:
        """R_beta keeping only the part of the measure inside B(X, radius)"""
        X = np.atleast_2d(X)
        radius = np.broadcast_to(np.asarray(radius, dtype=float), (X.shape[0],))
        a = self.exponent
        out = np.zeros(X.shape[0])
        for row, (x, r) in enumerate(zip(X, radius, strict=True)):
            idx = self.sample.tree.query_ball_point(x, r)
            if idx:
                rho = np.linalg.norm(self.sample.points[idx] - x, axis=1)
                out[row] = float(np.sum(self.sample.weights[idx] * rho ** (-a)))
        tail: FlatTail | None = self.sample.tail
        if tail is not None:
            p = a / 2
            rel = X - tail.origin
            s = rel @ tail.direction
            tau = np.linalg.norm(rel - s[:, None] * tail.direction, axis=1)
            half = np.sqrt(np.maximum(radius**2 - tau**2, 0.0))
            for L in (tail.stop - s, s - tail.start):
                lower = np.maximum(L, -half)
                kept = _half_line(lower, tau, p) - _half_line(np.maximum(half, lower), tau, p)
                out += np.where(half > lower, kept, 0.0)
        return out


def eval_smooth_distance(
    field: SmoothDistanceField, X: np.ndarray, order: int = 0
) -> SmoothDistanceValues:
    """Evaluate one probe (a single row is returned unbatched)"""
    X = np.asarray(X, dtype=float)
    values = field.evaluate(X, order)
    return values[0] if X.ndim == 1 else values


def comparability_constant(field: SmoothDistanceField, probes: np.ndarray) -> float:
    """C_beta = max over probes of max(D/delta, delta/D)"""
    probes = np.atleast_2d(probes)
    D = field.evaluate(probes).D
    delta = np.asarray(dist_to_boundary(field.sample, probes))
    ratio = D / delta
    return float(np.max(np.maximum(ratio, 1.0 / ratio)))


def tail_constant(field: SmoothDistanceField, X: np.ndarray, m_values: list[int]) -> float:
    """K' = max over m of 2^(beta m) (R - R^(m)) / R, R^(m) restricted to B(X, 2^m delta)"""
    X = np.asarray(X, dtype=float)
    total = float(field.direct(X).R[0])
    delta = float(dist_to_boundary(field.sample, X))
    worst = 0.0
    for m in m_values:
        kept = float(field.truncated_R(X, 2.0**m * delta)[0])
        worst = max(worst, 2.0 ** (field.beta * m) * max(total - kept, 0.0) / total)
    return worst

