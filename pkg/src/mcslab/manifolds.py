"""Parametrized manifold models, samples, and geodesic machinery.

A ManifoldModel bundles a chart over a 1-D parameter domain with
optional analytic tangents and geometric metadata (condition number
tau, volume).  sample_manifold turns a model into a finite sample with
orthonormal tangent frames and a radius neighbor graph whose shortest
paths serve as geodesic estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .errors import (
    GraphDisconnectedError,
    InvalidArgumentError,
)

BOX = "box"
CIRCLE = "circle"


@dataclass(frozen=True)
class ParameterDomain:
    """Product of 1-D factors, each an interval box or a circle.

    `bounds[i]` is (lo, hi); for a circle factor the parameter lives in
    [lo, hi) with period hi - lo and distances wrap.
    """

    kinds: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.kinds) != len(self.bounds) or not self.kinds:
            raise InvalidArgumentError("domain needs one (kind, bound) pair per coordinate")
        for kind, (lo, hi) in zip(self.kinds, self.bounds):
            if kind not in (BOX, CIRCLE):
                raise InvalidArgumentError(f"unknown domain kind {kind!r}")
            if not hi > lo:
                raise InvalidArgumentError(f"degenerate bound ({lo}, {hi})")

    @property
    def dimension(self) -> int:
        return len(self.kinds)

    def extent(self, i: int = 0) -> float:
        lo, hi = self.bounds[i]
        return hi - lo

    def canonize(self, theta) -> np.ndarray:
        """Map parameters into the representative range of each factor."""
        th = np.atleast_1d(np.asarray(theta, dtype=float)).copy()
        if th.shape[-1] != self.dimension:
            raise InvalidArgumentError(
                f"parameter has {th.shape[-1]} coordinates, domain has {self.dimension}"
            )
        for i, (kind, (lo, hi)) in enumerate(zip(self.kinds, self.bounds)):
            if kind == CIRCLE:
                th[..., i] = lo + np.mod(th[..., i] - lo, hi - lo)
            else:
                th[..., i] = np.clip(th[..., i], lo, hi)
        return th

    def distance(self, a, b) -> float:
        """Intrinsic parameter metric d_Theta (wrap on circle factors)."""
        av = np.atleast_1d(np.asarray(a, dtype=float))
        bv = np.atleast_1d(np.asarray(b, dtype=float))
        total = 0.0
        for i, (kind, (lo, hi)) in enumerate(zip(self.kinds, self.bounds)):
            d = abs(av[i] - bv[i])
            if kind == CIRCLE:
                period = hi - lo
                d = d % period
                d = min(d, period - d)
            total += d * d
        return math.sqrt(total)

    def uniform_grid(self, count: int) -> np.ndarray:
        """`count` evenly placed parameters (1-D factors only).

        Circle factors omit the duplicate endpoint; boxes include both.
        """
        if self.dimension != 1:
            raise InvalidArgumentError("uniform_grid supports 1-D domains")
        if count < 2:
            raise InvalidArgumentError("count must be at least 2")
        lo, hi = self.bounds[0]
        if self.kinds[0] == CIRCLE:
            vals = lo + (hi - lo) * np.arange(count) / count
        else:
            vals = np.linspace(lo, hi, count)
        return vals.reshape(count, 1)


@dataclass(frozen=True)
class ManifoldModel:
    """Chart-defined manifold with optional geometry metadata."""

    name: str
    domain: ParameterDomain
    ambient_dim: int
    chart_fn: Callable[[np.ndarray], np.ndarray]
    chart_many_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tangent_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tau: Optional[float] = None
    volume: Optional[float] = None
    tau_upper_bound: Optional[float] = None

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def chart(self, theta) -> np.ndarray:
        """Ambient point for a parameter (deterministic, pure)."""
        th = self.domain.canonize(theta)
        x = np.asarray(self.chart_fn(th), dtype=float)
        if x.shape != (self.ambient_dim,):
            raise InvalidArgumentError(
                f"chart returned shape {x.shape}, expected ({self.ambient_dim},)"
            )
        return x

    def chart_many(self, thetas: np.ndarray) -> np.ndarray:
        """Vectorized chart over an array of parameters, shape (m, N)."""
        ths = np.asarray(thetas, dtype=float)
        if ths.ndim == 1:
            ths = ths.reshape(-1, 1)
        ths = self.domain.canonize(ths)
        if self.chart_many_fn is not None:
            return np.asarray(self.chart_many_fn(ths), dtype=float)
        return np.stack([self.chart(t) for t in ths])

    def tangent(self, theta, fd_step: Optional[float] = None) -> np.ndarray:
        """Unnormalized tangent rows (K, N); analytic when available."""
        th = self.domain.canonize(theta)
        if self.tangent_fn is not None:
            t = np.asarray(self.tangent_fn(th), dtype=float)
            return t.reshape(self.dimension, self.ambient_dim)
        h = fd_step if fd_step is not None else 1e-6 * self.domain.extent(0)
        rows = []
        for i in range(self.dimension):
            e = np.zeros(self.dimension)
            e[i] = h
            rows.append((self.chart(th + e) - self.chart(th - e)) / (2 * h))
        return np.stack(rows)

    def frame(self, theta, fd_step: Optional[float] = None) -> np.ndarray:
        """Orthonormal tangent frame (K, N) via Gram-Schmidt."""
        return _orthonormalize(self.tangent(theta, fd_step))


def _orthonormalize(rows: np.ndarray) -> np.ndarray:
    out = np.array(rows, dtype=float)
    for i in range(out.shape[0]):
        for j in range(i):
            out[i] -= (out[i] @ out[j]) * out[j]
        nrm = np.linalg.norm(out[i])
        if nrm == 0.0:
            raise InvalidArgumentError("tangent rows are linearly dependent")
        out[i] /= nrm
    return out


def make_circle(kappa: float, ambient_dim: int) -> ManifoldModel:
    """Radius-kappa circle in the first two ambient coordinates.

    Condition number tau = kappa, volume (circumference) = 2 pi kappa.
    """
    if not kappa > 0:
        raise InvalidArgumentError(f"kappa must be positive, got {kappa}")
    if ambient_dim < 2:
        raise InvalidArgumentError("circle needs at least 2 ambient dimensions")

    def chart(th: np.ndarray) -> np.ndarray:
        x = np.zeros(ambient_dim)
        x[0] = kappa * math.cos(th[0])
        x[1] = kappa * math.sin(th[0])
        return x

    def chart_many(ths: np.ndarray) -> np.ndarray:
        x = np.zeros((len(ths), ambient_dim))
        x[:, 0] = kappa * np.cos(ths[:, 0])
        x[:, 1] = kappa * np.sin(ths[:, 0])
        return x

    def tangent(th: np.ndarray) -> np.ndarray:
        t = np.zeros((1, ambient_dim))
        t[0, 0] = -kappa * math.sin(th[0])
        t[0, 1] = kappa * math.cos(th[0])
        return t

    return ManifoldModel(
        name="circle",
        domain=ParameterDomain((CIRCLE,), ((0.0, 2 * math.pi),)),
        ambient_dim=ambient_dim,
        chart_fn=chart,
        chart_many_fn=chart_many,
        tangent_fn=tangent,
        tau=kappa,
        volume=2 * math.pi * kappa,
    )


def make_gaussian_pulse(sigma: float = 0.05, ambient_dim: int = 1024) -> ManifoldModel:
    """Sliding Gaussian pulse: x_theta[n] = exp(-((n/N - theta)^2)/(2 sigma^2)).

    Smooth non-compact-metadata curve over theta in [0, 1]; tau and
    volume are left unknown (estimated downstream when needed).
    """
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    if ambient_dim < 2:
        raise InvalidArgumentError("pulse needs at least 2 ambient dimensions")
    grid = np.arange(ambient_dim) / ambient_dim

    def chart(th: np.ndarray) -> np.ndarray:
        return np.exp(-((grid - th[0]) ** 2) / (2 * sigma**2))

    def chart_many(ths: np.ndarray) -> np.ndarray:
        return np.exp(-((grid[None, :] - ths[:, :1]) ** 2) / (2 * sigma**2))

    def tangent(th: np.ndarray) -> np.ndarray:
        diff = grid - th[0]
        return ((diff / sigma**2) * np.exp(-(diff**2) / (2 * sigma**2))).reshape(1, -1)

    return ManifoldModel(
        name="gaussian-pulse",
        domain=ParameterDomain((BOX,), ((0.0, 1.0),)),
        ambient_dim=ambient_dim,
        chart_fn=chart,
        chart_many_fn=chart_many,
        tangent_fn=tangent,
    )


def make_complex_exponential(f_c: int) -> ManifoldModel:
    """Complex exponential curve with frequencies -f_c..f_c.

    The complex vector (e^{i 2 pi n t})_n of length N_c = 2 f_c + 1 is
    embedded in R^{2 N_c} by interleaving real and imaginary parts, so
    every point has norm sqrt(N_c).  The curve has constant speed
    sqrt(sum (2 pi n)^2); its length is recorded as the volume and
    sqrt(N_c) as an upper bound for tau.
    """
    if not isinstance(f_c, (int, np.integer)) or f_c < 1:
        raise InvalidArgumentError(f"f_c must be a positive integer, got {f_c!r}")
    f_c = int(f_c)
    n_complex = 2 * f_c + 1
    freqs = np.arange(-f_c, f_c + 1)
    speed = math.sqrt(float(np.sum((2 * math.pi * freqs) ** 2)))

    def _interleave(z: np.ndarray) -> np.ndarray:
        out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
        out[..., 0::2] = z.real
        out[..., 1::2] = z.imag
        return out

    def chart(th: np.ndarray) -> np.ndarray:
        return _interleave(np.exp(2j * math.pi * freqs * th[0]))

    def chart_many(ths: np.ndarray) -> np.ndarray:
        return _interleave(np.exp(2j * math.pi * np.outer(ths[:, 0], freqs)))

    def tangent(th: np.ndarray) -> np.ndarray:
        z = np.exp(2j * math.pi * freqs * th[0])
        return _interleave(2j * math.pi * freqs * z).reshape(1, -1)

    return ManifoldModel(
        name=f"complex-exponential-{f_c}",
        domain=ParameterDomain((CIRCLE,), ((0.0, 1.0),)),
        ambient_dim=2 * n_complex,
        chart_fn=chart,
        chart_many_fn=chart_many,
        tangent_fn=tangent,
        volume=speed,
        tau_upper_bound=math.sqrt(n_complex),
    )


def make_line_segment(ambient_dim: int) -> ManifoldModel:
    """Unit segment theta * e_1; flat, so tau = +inf and volume = 1."""
    if ambient_dim < 1:
        raise InvalidArgumentError("segment needs at least 1 ambient dimension")

    def chart(th: np.ndarray) -> np.ndarray:
        x = np.zeros(ambient_dim)
        x[0] = th[0]
        return x

    def chart_many(ths: np.ndarray) -> np.ndarray:
        x = np.zeros((len(ths), ambient_dim))
        x[:, 0] = ths[:, 0]
        return x

    def tangent(th: np.ndarray) -> np.ndarray:
        t = np.zeros((1, ambient_dim))
        t[0, 0] = 1.0
        return t

    return ManifoldModel(
        name="line-segment",
        domain=ParameterDomain((BOX,), ((0.0, 1.0),)),
        ambient_dim=ambient_dim,
        chart_fn=chart,
        chart_many_fn=chart_many,
        tangent_fn=tangent,
        tau=math.inf,
        volume=1.0,
    )


@dataclass
class ManifoldSample:
    """Finite sample: parameters, points, frames, and a neighbor graph."""

    model: ManifoldModel
    params: np.ndarray          # (n, K)
    points: np.ndarray          # (n, N)
    frames: np.ndarray          # (n, K, N), orthonormal rows
    graph: csr_matrix           # symmetric radius graph, Euclidean weights
    radius: float
    _param_order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._param_order = np.argsort(self.params[:, 0], kind="stable")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def parameter_order(self) -> np.ndarray:
        """Indices sorting the sample by first parameter coordinate."""
        return self._param_order

    def to_csv(self, path) -> None:
        from .ioutils import write_csv, fmt

        k = self.params.shape[1]
        n = self.points.shape[1]
        header = [f"param_{i}" for i in range(k)] + [f"x_{i}" for i in range(n)]
        rows = (
            [fmt(v) for v in self.params[i]] + [fmt(v) for v in self.points[i]]
            for i in range(len(self))
        )
        write_csv(path, header, rows)


def _radius_graph(points: np.ndarray, radius: float) -> csr_matrix:
    tree = cKDTree(points)
    mat = tree.sparse_distance_matrix(tree, max_distance=radius, output_type="coo_matrix")
    mat = mat.tocsr()
    mat.setdiag(0.0)
    mat.eliminate_zeros()
    return mat


def _connected(graph: csr_matrix) -> bool:
    ncomp, _ = connected_components(graph, directed=False)
    return ncomp == 1


def connectivity_radius(model: ManifoldModel, count: int, safety: float = 2.01) -> float:
    """Graph radius guaranteed to connect the `count`-point uniform sample.

    Takes the largest chord between consecutive grid points (including
    the wrap-around pair on circular domains) times a safety factor, so
    every consecutive pair is linked.
    """
    if count < 2:
        raise InvalidArgumentError("count must be at least 2")
    points = model.chart_many(model.domain.uniform_grid(count))
    gaps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if model.domain.kinds[0] == CIRCLE:
        gaps = np.append(gaps, np.linalg.norm(points[-1] - points[0]))
    return safety * float(gaps.max())


def sample_manifold(
    model: ManifoldModel,
    count: int,
    graph_radius: float,
) -> ManifoldSample:
    """Evenly placed sample with tangent frames and a radius graph.

    Frames use the analytic tangent when the model has one, otherwise
    central differences with step extent / (100 * count).  Raises
    GraphDisconnectedError (reporting the smallest radius found by a
    doubling search) when the graph does not connect at `graph_radius`.
    """
    if count < 2:
        raise InvalidArgumentError("count must be at least 2")
    if not graph_radius > 0:
        raise InvalidArgumentError("graph_radius must be positive")
    params = model.domain.uniform_grid(count)
    points = model.chart_many(params)
    fd_step = model.domain.extent(0) / (100 * count)
    frames = np.stack([_orthonormalize(model.tangent(th, fd_step)) for th in params])

    graph = _radius_graph(points, graph_radius)
    if not _connected(graph):
        radius = graph_radius
        max_dist = 2.0 * float(np.linalg.norm(points - points.mean(axis=0), axis=1).max())
        while radius < max(max_dist, graph_radius) * 2:
            radius *= 2
            if _connected(_radius_graph(points, radius)):
                raise GraphDisconnectedError(graph_radius, radius)
        raise GraphDisconnectedError(graph_radius, math.inf)
    return ManifoldSample(
        model=model,
        params=params,
        points=points,
        frames=frames,
        graph=graph,
        radius=graph_radius,
    )


def geodesic_distance(sample: ManifoldSample, i: int, j: int) -> float:
    """Graph-shortest-path estimate of the geodesic distance."""
    n = len(sample)
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidArgumentError(f"indices ({i}, {j}) out of range for sample of {n}")
    if i == j:
        return 0.0
    dist = dijkstra(sample.graph, directed=False, indices=i)
    return float(dist[j])


def geodesic_distances(sample: ManifoldSample, sources: np.ndarray) -> np.ndarray:
    """Shortest-path distances from each source index to all points."""
    return dijkstra(sample.graph, directed=False, indices=np.asarray(sources, dtype=int))


def geodesic_between(sample: ManifoldSample, a: np.ndarray, b: np.ndarray) -> float:
    """Geodesic estimate between two ambient points near the manifold.

    Snaps each point to its nearest sample point and adds the two snap
    legs to the graph distance; the error is O(sample spacing).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = np.linalg.norm(sample.points - a, axis=1)
    db = np.linalg.norm(sample.points - b, axis=1)
    ia, ib = int(np.argmin(da)), int(np.argmin(db))
    return float(da[ia] + geodesic_distance(sample, ia, ib) + db[ib])
