"""Unnormalized model families, exact normalizers, and seeded samplers.

All models expose the *unnormalized* log density log q~(x); partition-free
objectives must be invariant to adding any constant to it.  Discrete symbols
are integers 0..m-1; Ising spins use the fixed map {0 -> -1, 1 -> +1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .grids import GridDensity, from_function
from .operators import DiscreteJoint, discrete_joint

# Smoothing constant for the generalized-Gaussian exponent (x^2 + eps^2)^(a/2),
# which keeps gradient and Laplacian defined at the origin.
GENGAUSS_EPS = 1e-3

MAX_ENUM_STATES = 2**24


class ModelKind(Enum):
    GAUSSIAN = "gaussian"
    ISING = "ising"
    POTTS = "potts"
    GEN_GAUSS_1D = "gengauss1d"


CONTINUOUS_KINDS = {ModelKind.GAUSSIAN, ModelKind.GEN_GAUSS_1D}
DISCRETE_KINDS = {ModelKind.ISING, ModelKind.POTTS}

_LAYOUTS = {
    ModelKind.GAUSSIAN: "mu,tril(sigma)",
    ModelKind.ISING: "h,edge_couplings",
    ModelKind.POTTS: "fields(d*m),edge_couplings",
    ModelKind.GEN_GAUSS_1D: "alpha",
}


@dataclass(frozen=True)
class Model:
    kind: ModelKind
    dim: int
    alphabet_size: int | None
    params: np.ndarray
    edges: tuple[tuple[int, int], ...] | None = None
    # Additive constant on log q~; partition-free objectives must ignore it.
    log_shift: float = 0.0

    @property
    def n_params(self) -> int:
        return self.params.size

    def shifted(self, c: float) -> "Model":
        """Same model with log q~ shifted by the constant c."""
        return replace(self, log_shift=self.log_shift + float(c))

    def with_params(self, theta) -> "Model":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.params.shape:
            raise ValueError(
                f"parameter vector has length {theta.size}, expected {self.params.size}"
            )
        if not np.all(np.isfinite(theta)):
            raise ValueError("parameters must be finite")
        return replace(self, params=theta)


def chain_edges(d: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(d - 1))


# ---------------------------------------------------------------------------
# Constructors

def gaussian_model(mu, cov) -> Model:
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = mu.size
    if cov.shape != (d, d):
        raise ValueError("covariance shape does not match mean")
    if not np.allclose(cov, cov.T):
        raise ValueError("covariance must be symmetric")
    np.linalg.cholesky(cov)  # rejects non-PD
    params = np.concatenate([mu, cov[np.tril_indices(d)]])
    return Model(ModelKind.GAUSSIAN, d, None, params)


def ising_model(h, couplings, edges=None) -> Model:
    h = np.atleast_1d(np.asarray(h, dtype=float))
    d = h.size
    edges = chain_edges(d) if edges is None else tuple(tuple(e) for e in edges)
    couplings = np.atleast_1d(np.asarray(couplings, dtype=float))
    if couplings.size != len(edges):
        raise ValueError("one coupling per edge required")
    for i, j in edges:
        if not (0 <= i < j < d):
            raise ValueError(f"bad edge ({i}, {j})")
    params = np.concatenate([h, couplings])
    return Model(ModelKind.ISING, d, 2, params, edges)


def potts_model(fields, couplings, edges=None) -> Model:
    fields = np.atleast_2d(np.asarray(fields, dtype=float))
    d, m = fields.shape
    if m < 2:
        raise ValueError("alphabet size must be >= 2")
    edges = chain_edges(d) if edges is None else tuple(tuple(e) for e in edges)
    couplings = np.atleast_1d(np.asarray(couplings, dtype=float))
    if couplings.size != len(edges):
        raise ValueError("one coupling per edge required")
    params = np.concatenate([fields.ravel(), couplings])
    return Model(ModelKind.POTTS, d, m, params, edges)


def gen_gauss_model(alpha: float) -> Model:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return Model(ModelKind.GEN_GAUSS_1D, 1, None, np.array([float(alpha)]))


# ---------------------------------------------------------------------------
# Parameter layout accessors

def gaussian_parts(model: Model) -> tuple[np.ndarray, np.ndarray]:
    d = model.dim
    mu = model.params[:d]
    cov = np.zeros((d, d))
    cov[np.tril_indices(d)] = model.params[d:]
    cov = cov + np.tril(cov, -1).T
    return mu, cov


def ising_parts(model: Model) -> tuple[np.ndarray, np.ndarray]:
    d = model.dim
    return model.params[:d], model.params[d:]


def potts_parts(model: Model) -> tuple[np.ndarray, np.ndarray]:
    d, m = model.dim, model.alphabet_size
    return model.params[: d * m].reshape(d, m), model.params[d * m:]


# ---------------------------------------------------------------------------
# Core operations

def _check_points(model: Model, x) -> np.ndarray:
    x = np.asarray(x)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.ndim != 2 or pts.shape[1] != model.dim:
        raise ValueError(f"points must have dimension {model.dim}")
    if model.kind in DISCRETE_KINDS:
        sym = pts.astype(int)
        if np.any(sym != pts):
            raise ValueError("discrete points must be integer symbols")
        if np.any(sym < 0) or np.any(sym >= model.alphabet_size):
            raise ValueError(
                f"symbols must lie in 0..{model.alphabet_size - 1}"
            )
        return sym
    return pts.astype(float)


def log_unnorm(model: Model, x) -> float | np.ndarray:
    """Unnormalized log density; accepts a point (d,) or a batch (N, d)."""
    single = np.asarray(x).ndim == 1
    pts = _check_points(model, x)
    if model.kind is ModelKind.GAUSSIAN:
        mu, cov = gaussian_parts(model)
        sol = np.linalg.solve(cov, (pts - mu).T).T
        out = -0.5 * np.einsum("ni,ni->n", pts - mu, sol)
    elif model.kind is ModelKind.GEN_GAUSS_1D:
        alpha = model.params[0]
        out = -((pts[:, 0] ** 2 + GENGAUSS_EPS**2) ** (alpha / 2.0))
    elif model.kind is ModelKind.ISING:
        h, coup = ising_parts(model)
        s = 2.0 * pts - 1.0
        out = s @ h
        for k, (i, j) in enumerate(model.edges):
            out = out + coup[k] * s[:, i] * s[:, j]
    elif model.kind is ModelKind.POTTS:
        fields, coup = potts_parts(model)
        out = fields[np.arange(model.dim), pts].sum(axis=1)
        for k, (i, j) in enumerate(model.edges):
            out = out + coup[k] * (pts[:, i] == pts[:, j])
    else:  # pragma: no cover
        raise ValueError(f"unknown kind {model.kind}")
    out = out + model.log_shift
    return float(out[0]) if single else out


def _require_continuous(model: Model) -> None:
    if model.kind not in CONTINUOUS_KINDS:
        raise ValueError(f"{model.kind.value} is not a continuous model")


def _require_discrete(model: Model) -> None:
    if model.kind not in DISCRETE_KINDS:
        raise ValueError(f"{model.kind.value} is not a discrete model")


def grad_x_log(model: Model, x) -> np.ndarray:
    """Analytic gradient of log q~ with respect to the data point."""
    _require_continuous(model)
    single = np.asarray(x).ndim == 1
    pts = _check_points(model, x)
    if model.kind is ModelKind.GAUSSIAN:
        mu, cov = gaussian_parts(model)
        out = -np.linalg.solve(cov, (pts - mu).T).T
    else:
        alpha = model.params[0]
        u = pts[:, 0] ** 2 + GENGAUSS_EPS**2
        out = (-alpha * pts[:, 0] * u ** (alpha / 2.0 - 1.0))[:, None]
    return out[0] if single else out


def laplacian_x_log(model: Model, x) -> float | np.ndarray:
    """Analytic Laplacian of log q~ with respect to the data point."""
    _require_continuous(model)
    single = np.asarray(x).ndim == 1
    pts = _check_points(model, x)
    if model.kind is ModelKind.GAUSSIAN:
        _, cov = gaussian_parts(model)
        out = np.full(pts.shape[0], -np.trace(np.linalg.inv(cov)))
    else:
        alpha = model.params[0]
        u = pts[:, 0] ** 2 + GENGAUSS_EPS**2
        out = -alpha * u ** (alpha / 2.0 - 2.0) * ((alpha - 1.0) * pts[:, 0] ** 2 + GENGAUSS_EPS**2)
    return float(out[0]) if single else out


def conditional_table(model: Model, X) -> np.ndarray:
    """Singleton conditionals q(xi | x^{\\i}) for every sample, coordinate, symbol.

    Returns shape (N, d, m); probabilities along the last axis sum to one.
    Computed in log space with max subtraction, so it is partition-free and
    underflow-safe.
    """
    _require_discrete(model)
    pts = _check_points(model, np.atleast_2d(X))
    n, d, m = pts.shape[0], model.dim, model.alphabet_size
    logs = np.empty((n, d, m))
    for i in range(d):
        for sym in range(m):
            y = pts.copy()
            y[:, i] = sym
            logs[:, i, sym] = log_unnorm(model, y)
    logs -= logs.max(axis=2, keepdims=True)
    table = np.exp(logs)
    table /= table.sum(axis=2, keepdims=True)
    return table


def singleton_conditional(model: Model, x, i: int) -> np.ndarray:
    """Conditional distribution of coordinate i given the rest of x."""
    _require_discrete(model)
    if not 0 <= i < model.dim:
        raise IndexError(f"coordinate {i} out of range")
    return conditional_table(model, np.asarray(x)[None, :])[0, i]


def default_box(model: Model) -> tuple[float, float]:
    """A quadrature box wide enough that the density decays below 1e-12 peak."""
    _require_continuous(model)
    if model.kind is ModelKind.GAUSSIAN:
        mu, cov = gaussian_parts(model)
        half = 8.0 * float(np.sqrt(np.diag(cov).max()))
        lo, hi = float(mu.min()) - half, float(mu.max()) + half
        return lo, hi
    alpha = model.params[0]
    half = max(12.0, float(np.log(1e18) ** (1.0 / alpha)))
    return -half, half


def exact_normalize(model: Model, box=None, n: int | None = None):
    """Brute-force normalization: full enumeration (discrete) or quadrature.

    Returns a DiscreteJoint for discrete kinds and a GridDensity for
    continuous 1-D/2-D kinds.
    """
    if model.kind in DISCRETE_KINDS:
        m, d = model.alphabet_size, model.dim
        if m**d > MAX_ENUM_STATES:
            raise ValueError(f"state space {m}**{d} too large to enumerate")
        states = np.indices((m,) * d).reshape(d, -1).T
        logs = log_unnorm(model, states)
        logs = logs - logs.max()
        probs = np.exp(logs)
        probs /= probs.sum()
        return discrete_joint(probs.reshape((m,) * d))
    if model.dim > 2:
        raise ValueError("continuous quadrature supported in 1-D and 2-D only")
    if box is None:
        box = default_box(model)
    if n is None:
        n = 4096 if model.dim == 1 else 256
    if model.dim == 1:
        def fn(xs):
            logs = log_unnorm(model, xs[:, None])
            return np.exp(logs - logs.max())
        return from_function(fn, box, n)

    def fn2(xx, yy):
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        logs = log_unnorm(model, pts)
        return np.exp(logs - logs.max()).reshape(xx.shape)

    if np.isscalar(box[0]):
        box = (box, box)
    return from_function(fn2, box, n)


# ---------------------------------------------------------------------------
# Datasets

@dataclass(frozen=True)
class Dataset:
    """N samples of d-dimensional data; sample order is significant."""

    values: np.ndarray
    kind: str  # "continuous" | "discrete"
    alphabet_size: int | None
    seed: int = 0

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def continuous_dataset(values, seed: int = 0) -> Dataset:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] < 1:
        raise ValueError("dataset needs at least one sample")
    return Dataset(values, "continuous", None, seed)


def discrete_dataset(values, m: int, seed: int = 0) -> Dataset:
    values = np.atleast_2d(np.asarray(values))
    sym = values.astype(int)
    if np.any(sym != values) or np.any(sym < 0) or np.any(sym >= m):
        raise ValueError(f"discrete entries must lie in 0..{m - 1}")
    if sym.shape[0] < 1:
        raise ValueError("dataset needs at least one sample")
    return Dataset(sym, "discrete", m, seed)


def sample(model: Model, n: int, seed: int) -> Dataset:
    """Draw n reproducible samples from the exactly normalized model."""
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    if model.kind is ModelKind.GAUSSIAN:
        mu, cov = gaussian_parts(model)
        chol = np.linalg.cholesky(cov)
        vals = rng.standard_normal((n, model.dim)) @ chol.T + mu
        return continuous_dataset(vals, seed)
    if model.kind in DISCRETE_KINDS:
        joint = exact_normalize(model)
        flat = rng.choice(joint.probs.size, size=n, p=joint.probs.ravel())
        states = np.column_stack(np.unravel_index(flat, joint.probs.shape))
        return discrete_dataset(states, model.alphabet_size, seed)
    # 1-D inverse CDF on a fine quadrature grid
    grid = exact_normalize(model, n=1 << 16)
    x = grid.axes[0]
    h = grid.spacing[0]
    cdf = np.concatenate([[0.0], np.cumsum((grid.values[1:] + grid.values[:-1]) * h / 2)])
    cdf /= cdf[-1]
    u = rng.random(n)
    vals = np.interp(u, cdf, x)[:, None]
    return continuous_dataset(vals, seed)


# ---------------------------------------------------------------------------
# File formats

def write_dataset_csv(path, data: Dataset) -> None:
    header = ",".join(f"x{i}" for i in range(data.dim))
    lines = [header]
    if data.kind == "discrete":
        for row in data.values:
            lines.append(",".join(str(int(v)) for v in row))
    else:
        for row in data.values:
            lines.append(",".join(f"{v:.17g}" for v in row))
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_dataset_csv(path, alphabet_size: int | None = None) -> Dataset:
    """Load a dataset CSV; pass alphabet_size to read symbols, else reals."""
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if cols != [f"x{i}" for i in range(len(cols))]:
            raise ValueError(f"bad dataset header: {header!r}")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.shape[1] != len(cols):
        raise ValueError("row width does not match header")
    if alphabet_size is not None:
        return discrete_dataset(body, alphabet_size, seed=0)
    return continuous_dataset(body, seed=0)


def model_to_json(model: Model) -> str:
    obj = {
        "kind": model.kind.value,
        "dim": model.dim,
        "params": model.params.tolist(),
        "layout": _LAYOUTS[model.kind],
    }
    if model.alphabet_size is not None:
        obj["alphabet_size"] = model.alphabet_size
    return json.dumps(obj, indent=2)


def model_from_json(text: str) -> Model:
    obj = json.loads(text)
    allowed = {"kind", "dim", "alphabet_size", "params", "layout"}
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown keys in model file: {sorted(extra)}")
    try:
        kind = ModelKind(obj["kind"])
    except ValueError:
        raise ValueError(f"unknown model kind {obj.get('kind')!r}") from None
    if obj.get("layout") != _LAYOUTS[kind]:
        raise ValueError(
            f"layout {obj.get('layout')!r} does not match kind {kind.value!r}"
        )
    d = int(obj["dim"])
    params = np.asarray(obj["params"], dtype=float)
    if kind is ModelKind.GAUSSIAN:
        if params.size != d + d * (d + 1) // 2:
            raise ValueError("bad Gaussian parameter length")
        model = Model(kind, d, None, params)
        gaussian_parts(model)  # validate
        np.linalg.cholesky(gaussian_parts(model)[1])
        return model
    if kind is ModelKind.GEN_GAUSS_1D:
        if d != 1 or params.size != 1 or params[0] <= 0:
            raise ValueError("bad generalized-Gaussian parameters")
        return Model(kind, 1, None, params)
    m = int(obj["alphabet_size"])
    edges = chain_edges(d)
    if kind is ModelKind.ISING:
        if m != 2:
            raise ValueError("Ising alphabet size must be 2")
        if params.size != d + len(edges):
            raise ValueError("bad Ising parameter length")
        return Model(kind, d, 2, params, edges)
    if params.size != d * m + len(edges):
        raise ValueError("bad Potts parameter length")
    return Model(kind, d, m, params, edges)
