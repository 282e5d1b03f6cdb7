"""Covering nets, the multiresolution secant net hierarchy, and secants.

greedy_net builds farthest-point coverings on a sample.  The hierarchy
stacks point nets whose resolution shrinks by 4 per level with
tangent-ball nets shrinking by 2, which together cover the normalized
secant set at resolution 2^-j * delta per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AssumptionViolatedError,
    InvalidArgumentError,
    NumericalDisagreementError,
)
from .geometry import _strided_pairs, estimate_reach
from .manifolds import ManifoldSample
from .measurement import volume_reach_assumption_ok

# hierarchy constants
C_ETA = 0.4
C_ETA_PRIME = 1.7 - math.sqrt(2.0)
LONG_CHORD_FACTOR = 1.6


@dataclass(frozen=True)
class Net:
    """Greedy farthest-point covering of a sample at resolution delta."""

    center_indices: np.ndarray
    delta: float
    cover_radius: float          # max distance of any sample point to the net
    cardinality_bound: Optional[float]   # packing bound when tau, V known

    def __len__(self) -> int:
        return len(self.center_indices)


def packing_bound(delta: float, dim: int, tau: float, volume: float) -> Optional[float]:
    """Volume packing bound for delta-separated centers, delta <= tau/2.

    (2 / (theta(delta / 4 tau) * delta))^K * V / V_ball(K) with
    theta(alpha) = sqrt(1 - alpha^2); None outside its validity range.
    """
    if not delta <= tau / 2 or not math.isfinite(tau):
        return None
    from .geometry import unit_ball_volume

    theta = math.sqrt(1.0 - (delta / (4 * tau)) ** 2)
    return (2.0 / (theta * delta)) ** dim * volume / unit_ball_volume(dim)


def greedy_net(sample: ManifoldSample, delta: float) -> Net:
    """Farthest-point covering: start at index 0, repeatedly add the
    point farthest from the chosen centers until everything is within
    delta.  Centers are pairwise > delta apart, so the packing bound
    applies whenever the model's tau and volume are known.
    """
    if not delta > 0:
        raise InvalidArgumentError("delta must be positive")
    pts = sample.points
    dmin = np.linalg.norm(pts - pts[0], axis=1)
    centers = [0]
    while True:
        far = int(np.argmax(dmin))
        if dmin[far] <= delta:
            break
        centers.append(far)
        dmin = np.minimum(dmin, np.linalg.norm(pts - pts[far], axis=1))
    model = sample.model
    bound = None
    if model.tau is not None and math.isfinite(model.tau) and model.volume is not None:
        bound = packing_bound(delta, model.dimension, model.tau, model.volume)
        if bound is not None and len(centers) > bound:
            raise NumericalDisagreementError(
                f"greedy net has {len(centers)} centers, exceeding the packing bound "
                f"{bound:.6g} at delta={delta:g}"
            )
    return Net(
        center_indices=np.asarray(centers, dtype=int),
        delta=delta,
        cover_radius=float(dmin.max()),
        cardinality_bound=bound,
    )


def _tangent_ball_offsets(rho: float) -> np.ndarray:
    """rho-net of the interval [-1, 1] (unit ball of a 1-D tangent)."""
    m = max(1, math.ceil(1.0 / rho))
    return np.clip(-1.0 + (2 * np.arange(m) + 1) * rho, -1.0, 1.0)


@dataclass(frozen=True)
class SecantSample:
    """Unit chord directions between sample points, split by length.

    Long pairs exceed the threshold 1.6 sqrt(delta1 / tau) * tau; short
    pairs also contribute their renormalized tangent-plane surrogate at
    the first endpoint.  Without a (delta1, tau) context every pair is
    long and no surrogates are formed.
    """

    pairs: np.ndarray            # (m, 2) int indices
    directions: np.ndarray       # (m, N) unit vectors
    is_long: np.ndarray          # (m,) bool
    surrogates: np.ndarray       # (k, N) unit vectors (short pairs)
    surrogate_pairs: np.ndarray  # (k, 2) indices matching surrogates
    threshold: float

    def __len__(self) -> int:
        return len(self.directions)


def sample_secants(
    sample: ManifoldSample,
    delta1: Optional[float] = None,
    tau: Optional[float] = None,
    max_pairs: int = 200_000,
) -> SecantSample:
    """Strided all-pairs chord directions, with the long/short split.

    Directions are unit to 1e-12 by construction.  Pair selection is a
    deterministic even stride over the triangular enumeration, so the
    same arguments always yield the same secant sample.
    """
    n = len(sample)
    if n < 2:
        raise InvalidArgumentError("need at least 2 points for secants")
    i, j = _strided_pairs(n, max_pairs)
    chords = sample.points[j] - sample.points[i]
    lengths = np.linalg.norm(chords, axis=1)
    keep = lengths > 0
    i, j, chords, lengths = i[keep], j[keep], chords[keep], lengths[keep]
    directions = chords / lengths[:, None]

    if delta1 is None or tau is None:
        threshold = 0.0
        is_long = np.ones(len(directions), dtype=bool)
        surrogate_vecs = np.empty((0, sample.points.shape[1]))
        spairs = np.empty((0, 2), dtype=int)
    else:
        if not delta1 > 0 or not tau > 0:
            raise InvalidArgumentError("delta1 and tau must be positive")
        threshold = LONG_CHORD_FACTOR * math.sqrt(delta1 / tau) * tau
        is_long = lengths > threshold
        short = ~is_long
        t_base = sample.frames[i[short]][:, 0, :]     # K = 1 tangent rows
        coef = np.einsum("pd,pd->p", directions[short], t_base)
        proj = coef[:, None] * t_base
        norms = np.linalg.norm(proj, axis=1)
        ok = norms > 1e-12
        surrogate_vecs = proj[ok] / norms[ok, None]
        spairs = np.stack([i[short][ok], j[short][ok]], axis=1)
    return SecantSample(
        pairs=np.stack([i, j], axis=1),
        directions=directions,
        is_long=is_long,
        surrogates=surrogate_vecs,
        surrogate_pairs=spairs,
        threshold=threshold,
    )


@dataclass
class NetHierarchy:
    """Stacked nets covering the normalized secant set.

    Level j covers secant directions at resolution 2^-j * delta using
    point-net chords (resolution delta1 / 4^j) for long chords and
    tangent-ball vectors (resolution delta_t / 2^j) for short ones.
    """

    sample: ManifoldSample
    delta: float
    delta1: float
    delta_t: float
    tau: float
    volume: float
    levels: list[Net]
    tangent_offsets: list[np.ndarray]
    level_cardinality_bounds: list[float]
    certificate_available: bool
    _center_points: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self._center_points = [self.sample.points[net.center_indices] for net in self.levels]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def long_threshold(self, level: int) -> float:
        d1 = self.delta1 / 4.0**level
        return LONG_CHORD_FACTOR * math.sqrt(d1 / self.tau) * self.tau

    def level_size(self, level: int) -> int:
        """Number of stored elements: chord directions pairs + tangent vectors."""
        c = len(self.levels[level])
        return c * (c - 1) + c * len(self.tangent_offsets[level])

    def witness_distance(self, level: int, i: int, j: int) -> float:
        """Distance from the secant U(x_i, x_j) to this level's net via the
        constructive witness (nearest centers for long chords, nearest
        tangent-ball vector for short ones).  Upper-bounds the distance
        to the nearest net element.
        """
        pts = self.sample.points
        chord = pts[j] - pts[i]
        length = np.linalg.norm(chord)
        if length == 0:
            raise InvalidArgumentError("secant endpoints coincide")
        u = chord / length
        centers = self.levels[level].center_indices
        cpts = self._center_points[level]
        if length > self.long_threshold(level):
            p1 = int(np.argmin(np.linalg.norm(cpts - pts[i], axis=1)))
            p2 = int(np.argmin(np.linalg.norm(cpts - pts[j], axis=1)))
            if centers[p1] == centers[p2]:
                return float(np.linalg.norm(u - self._best_tangent(level, i, u)))
            w = cpts[p2] - cpts[p1]
            w = w / np.linalg.norm(w)
            return float(np.linalg.norm(u - w))
        return float(np.linalg.norm(u - self._best_tangent(level, i, u)))

    def _best_tangent(self, level: int, i: int, u: np.ndarray) -> np.ndarray:
        cpts = self._center_points[level]
        centers = self.levels[level].center_indices
        p = int(np.argmin(np.linalg.norm(cpts - self.sample.points[i], axis=1)))
        t = self.sample.frames[centers[p]][0]
        coef = float(u @ t)
        offsets = self.tangent_offsets[level]
        v = offsets[int(np.argmin(np.abs(offsets - coef)))]
        return v * t

    def to_csv(self, path) -> None:
        """Write one row per (level, center index) pair."""
        from .ioutils import write_csv

        rows = (
            [str(level), str(int(idx))]
            for level, net in enumerate(self.levels)
            for idx in net.center_indices
        )
        write_csv(path, ["level", "center_index"], rows)

    def materialize_level(self, level: int, max_elements: int = 2_000_000) -> np.ndarray:
        """All stored level elements as vectors (for exhaustive scans)."""
        size = self.level_size(level)
        if size > max_elements:
            raise InvalidArgumentError(
                f"level {level} holds {size} elements, above the cap {max_elements}"
            )
        cpts = self._center_points[level]
        c = len(cpts)
        elements = []
        if c > 1:
            diffs = cpts[None, :, :] - cpts[:, None, :]
            lens = np.linalg.norm(diffs, axis=2)
            mask = lens > 0
            elements.append(diffs[mask] / lens[mask][:, None])
        frames = self.sample.frames[self.levels[level].center_indices][:, 0, :]
        offs = self.tangent_offsets[level]
        elements.append((offs[None, :, None] * frames[:, None, :]).reshape(-1, frames.shape[1]))
        return np.concatenate(elements, axis=0)


def hierarchy_cardinality_bound(
    j: int, delta: float, dim: int, tau: float, volume: float
) -> float:
    """Per-level bound 2 * 4^{2jK} (6.12 sqrt(K)/delta^2)^{2K} (V/tau^K)^2."""
    return (
        2.0
        * 4.0 ** (2 * j * dim)
        * (6.12 * math.sqrt(dim) / delta**2) ** (2 * dim)
        * (volume / tau**dim) ** 2
    )


def build_net_hierarchy(
    sample: ManifoldSample,
    delta: float,
    depth: int,
    tau: Optional[float] = None,
    volume: Optional[float] = None,
    require_certificate: bool = False,
) -> NetHierarchy:
    """Point nets C_j at resolution delta1 / 4^j plus tangent-ball nets
    at resolution delta_t / 2^j, with delta1 = 0.16 tau delta^2 and
    delta_t = 0.4 (1.7 - sqrt 2) delta.

    The cardinality path always builds; the volume-to-reach assumption
    only gates the certificate flag unless require_certificate is set.
    """
    if not 0 < delta <= 0.5:
        raise InvalidArgumentError(f"delta must lie in (0, 1/2], got {delta}")
    if depth < 0:
        raise InvalidArgumentError("depth must be nonnegative")
    model = sample.model
    dim = model.dimension
    if tau is None:
        if model.tau is not None and math.isfinite(model.tau):
            tau = float(model.tau)
        else:
            tau = estimate_reach(sample).tau_hat
    if volume is None:
        if model.volume is not None:
            volume = float(model.volume)
        else:
            order = sample.parameter_order
            pts = sample.points[order]
            seg = np.linalg.norm(np.diff(pts, axis=0), axis=1).sum()
            if sample.model.domain.kinds[0] == "circle":
                seg += float(np.linalg.norm(pts[-1] - pts[0]))
            volume = float(seg)
    if not (math.isfinite(tau) and tau > 0):
        raise InvalidArgumentError(f"hierarchy needs a finite positive tau, got {tau}")

    assumption_ok = volume_reach_assumption_ok(dim, tau, volume)
    if require_certificate and not assumption_ok:
        threshold = (21.0 / (2.0 * math.sqrt(dim))) ** dim
        raise AssumptionViolatedError(
            f"volume-to-reach ratio V / tau^K = {volume / tau**dim:.6g} is below the "
            f"required threshold {threshold:.6g}; the chaining certificate is unavailable"
        )

    delta1 = C_ETA**2 * tau * delta**2
    delta_t = C_ETA * C_ETA_PRIME * delta
    levels = []
    offsets = []
    bounds = []
    base_packing = packing_bound(delta1, dim, tau, volume)
    for j in range(depth + 1):
        net = greedy_net(sample, delta1 / 4.0**j)
        if base_packing is not None:
            level_bound = 4.0 ** (j * dim) * base_packing
            if len(net) > level_bound:
                raise NumericalDisagreementError(
                    f"level {j} net has {len(net)} centers, exceeding 4^jK * N0 = "
                    f"{level_bound:.6g}"
                )
        levels.append(net)
        offsets.append(_tangent_ball_offsets(delta_t / 2.0**j))
        bounds.append(hierarchy_cardinality_bound(j, delta, dim, tau, volume))
    return NetHierarchy(
        sample=sample,
        delta=delta,
        delta1=delta1,
        delta_t=delta_t,
        tau=tau,
        volume=volume,
        levels=levels,
        tangent_offsets=offsets,
        level_cardinality_bounds=bounds,
        certificate_available=assumption_ok,
    )
