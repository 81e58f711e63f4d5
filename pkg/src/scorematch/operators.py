"""Linear operators on densities: grid gradient and discrete marginalization.

Both operators come with their adjoints (negative divergence for the gradient,
the summed per-coordinate marginalization for the discrete case), exact adjoint
residual checks, and the telescoping joint-ratio reconstruction that makes the
marginalization operator information-complete.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grids import GridDensity, log_values, quad_weights, require_same_geometry, support_mask


class LinearOperatorKind(Enum):
    GRADIENT = "gradient"
    MARGINALIZATION = "marginalization"


@dataclass(frozen=True)
class DiscreteJoint:
    """Dense joint distribution over {0..m-1}^d, stored as an (m,)*d table.

    Row-major state indexing, coordinate 0 slowest:
    idx = sum_i x_i * m**(d-1-i), i.e. plain C-order flattening.
    """

    m: int
    d: int
    probs: np.ndarray

    def prob(self, x) -> float:
        return float(self.probs[tuple(int(v) for v in x)])

    def to_json(self) -> str:
        return json.dumps(
            {"m": self.m, "d": self.d, "probs": self.probs.ravel().tolist()}
        )

    @staticmethod
    def from_json(text: str) -> "DiscreteJoint":
        obj = json.loads(text)
        extra = set(obj) - {"m", "d", "probs"}
        if extra:
            raise ValueError(f"unknown keys in joint file: {sorted(extra)}")
        m, d = int(obj["m"]), int(obj["d"])
        probs = np.asarray(obj["probs"], dtype=float).reshape((m,) * d)
        return discrete_joint(probs)


def discrete_joint(probs: np.ndarray) -> DiscreteJoint:
    probs = np.asarray(probs, dtype=float)
    m = probs.shape[0]
    if any(s != m for s in probs.shape):
        raise ValueError("joint table must be an (m,)*d cube")
    if np.any(probs < 0):
        raise ValueError("joint probabilities must be nonnegative")
    total = probs.sum()
    if abs(total - 1.0) > 1e-12:
        probs = probs / total
    return DiscreteJoint(m=m, d=probs.ndim, probs=probs)


# ---------------------------------------------------------------------------
# Grid stencils (second-order central in the interior, one-sided at the edges)

def grid_gradient(values: np.ndarray, spacing) -> list[np.ndarray]:
    if np.isscalar(spacing):
        spacing = (spacing,) * values.ndim
    return [
        np.gradient(values, spacing[ax], axis=ax, edge_order=1)
        for ax in range(values.ndim)
    ]


def _second_diff(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    f = np.moveaxis(values, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    # second-order one-sided stencils at the two boundary layers
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(out, 0, axis)


def grid_laplacian(values: np.ndarray, spacing) -> np.ndarray:
    if np.isscalar(spacing):
        spacing = (spacing,) * values.ndim
    out = np.zeros_like(values, dtype=float)
    for ax in range(values.ndim):
        out += _second_diff(values, spacing[ax], ax)
    return out


def grid_divergence(components: list[np.ndarray], spacing) -> np.ndarray:
    if np.isscalar(spacing):
        spacing = (spacing,) * components[0].ndim
    out = np.zeros_like(components[0], dtype=float)
    for ax, g in enumerate(components):
        out += np.gradient(g, spacing[ax], axis=ax, edge_order=1)
    return out


# ---------------------------------------------------------------------------
# Marginalization operator on dense joint tables

def marginalize(table: np.ndarray) -> np.ndarray:
    """Apply the marginalization operator; component i sums out coordinate i.

    Returns shape (d,) + table.shape; component i is constant along axis i.
    """
    d = table.ndim
    out = np.empty((d,) + table.shape, dtype=float)
    for i in range(d):
        out[i] = np.broadcast_to(table.sum(axis=i, keepdims=True), table.shape)
    return out


def apply_operator(kind: LinearOperatorKind, f, spacing=None):
    """Apply an operator to a density table (marginalization) or grid (gradient)."""
    if kind is LinearOperatorKind.MARGINALIZATION:
        if isinstance(f, GridDensity):
            return marginalize(f.values)
        return marginalize(np.asarray(f, dtype=float))
    if kind is LinearOperatorKind.GRADIENT:
        if isinstance(f, GridDensity):
            return grid_gradient(f.values, f.spacing)
        if spacing is None:
            raise ValueError("gradient operator needs grid spacing")
        return grid_gradient(np.asarray(f, dtype=float), spacing)
    raise ValueError(f"unsupported operator {kind}")


def marginalization_adjoint_residual(f: np.ndarray, g: np.ndarray) -> float:
    """|<Mf, g> - <f, sum_i M_i g_i>| on a finite discrete space (exact identity)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if g.shape != (f.ndim,) + f.shape:
        raise ValueError("g must have shape (d,) + f.shape")
    mf = marginalize(f)
    lhs = float(np.sum(mf * g))
    adj = np.zeros_like(f)
    for i in range(f.ndim):
        adj += np.broadcast_to(g[i].sum(axis=i, keepdims=True), f.shape)
    rhs = float(np.sum(f * adj))
    return abs(lhs - rhs)


def gradient_adjoint_residual(f: np.ndarray, g: list[np.ndarray], axes) -> float:
    """|<grad f, g> - <f, -div g>| under trapezoid quadrature on a grid.

    Exact only up to boundary terms; meaningful for compactly supported g.
    """
    f = np.asarray(f, dtype=float)
    spacing = tuple(float(a[1] - a[0]) for a in axes)
    w = quad_weights(tuple(np.asarray(a, dtype=float) for a in axes))
    grads = grid_gradient(f, spacing)
    lhs = float(sum(np.sum(w * gf * gi) for gf, gi in zip(grads, g)))
    rhs = float(np.sum(w * f * (-grid_divergence(list(g), spacing))))
    return abs(lhs - rhs)


def adjoint_identity_residual(kind: LinearOperatorKind, f, g, axes=None) -> float:
    if kind is LinearOperatorKind.MARGINALIZATION:
        return marginalization_adjoint_residual(f, g)
    if kind is LinearOperatorKind.GRADIENT:
        if axes is None:
            raise ValueError("gradient adjoint residual needs grid axes")
        return gradient_adjoint_residual(f, g, axes)
    raise ValueError(f"unsupported operator {kind}")


# ---------------------------------------------------------------------------
# Brook reconstruction: singleton conditionals -> joint

class ZeroConditionalError(ValueError):
    def __init__(self, coordinate: int):
        super().__init__(
            f"zero singleton conditional encountered at coordinate {coordinate}"
        )
        self.coordinate = coordinate


def brook_ratio(conds, xi, xi_tilde, order=None) -> float:
    """Joint probability ratio p(xi)/p(xi_tilde) from singleton conditionals.

    ``conds(i, x)`` must return the length-m conditional distribution of
    coordinate i given the other coordinates of x.  The telescoping product
    walks the coordinates (in ``order``, default 0..d-1), swapping one
    coordinate at a time from xi to xi_tilde.
    """
    xi = [int(v) for v in xi]
    xi_tilde = [int(v) for v in xi_tilde]
    d = len(xi)
    if len(xi_tilde) != d:
        raise ValueError("state dimensions differ")
    order = list(range(d)) if order is None else list(order)
    x = list(xi)
    ratio = 1.0
    for k in order:
        c = np.asarray(conds(k, x), dtype=float)
        num, den = c[xi[k]], c[xi_tilde[k]]
        if num <= 0.0 or den <= 0.0:
            raise ZeroConditionalError(k)
        ratio *= num / den
        x[k] = xi_tilde[k]
    return ratio


def joint_conditionals(joint: DiscreteJoint):
    """Singleton-conditional accessor backed by a dense joint table."""

    def conds(i, x):
        idx = tuple(slice(None) if j == i else int(x[j]) for j in range(joint.d))
        col = joint.probs[idx]
        total = col.sum()
        if total <= 0.0:
            raise ZeroConditionalError(i)
        return col / total

    return conds


def reconstruct_joint(conds, m: int, d: int) -> DiscreteJoint:
    """Rebuild the full joint from singleton conditionals (Brook telescoping).

    Anchors every state against the all-zeros reference state and renormalizes.
    """
    shape = (m,) * d
    ratios = np.empty(shape, dtype=float)
    ref = [0] * d
    for flat in range(m**d):
        state = np.unravel_index(flat, shape)
        ratios[state] = brook_ratio(conds, state, ref)
    return discrete_joint(ratios)


# ---------------------------------------------------------------------------
# Gradient completeness check on grids

@dataclass(frozen=True)
class CompletenessReport:
    applicable: bool
    held: bool
    max_score_diff: float
    max_density_diff: float
    bound: float


def gradient_completeness_check(
    p: GridDensity, q: GridDensity, eps: float
) -> CompletenessReport:
    """Check the implication |grad log p - grad log q| <= eps  =>  p close to q.

    If the scores agree to eps pointwise (on the shared support), log(p/q) can
    drift by at most eps * L over a box of diameter L, and normalization pins
    the constant, so |p - q| <= C * eps with C = 2 * L * max(p).
    """
    require_same_geometry(p, q)
    mask = support_mask(p) & support_mask(q)
    gp = grid_gradient(log_values(p), p.spacing)
    gq = grid_gradient(log_values(q), q.spacing)
    diff = np.zeros_like(p.values)
    for a, b in zip(gp, gq):
        diff = np.maximum(diff, np.abs(a - b))
    max_score_diff = float(diff[mask].max())
    box_diam = float(np.sqrt(sum((hi - lo) ** 2 for lo, hi in p.box)))
    bound = 2.0 * box_diam * float(p.values.max()) * eps
    max_density_diff = float(np.abs(p.values - q.values).max())
    if max_score_diff > eps:
        return CompletenessReport(False, False, max_score_diff, max_density_diff, bound)
    return CompletenessReport(
        True, max_density_diff <= bound, max_score_diff, max_density_diff, bound
    )
