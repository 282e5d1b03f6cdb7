"""Geometric estimators and executable lemma checks.

Reach estimation via the pairwise chord/normal quotient, principal
angles between tangent frames, the Dirichlet kernel, unit-ball volume,
and a suite of inequality checks that replay the geometric lemmas on a
finite sample and report their worst slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gamma

from .errors import (
    InsufficientSampleError,
    InvalidArgumentError,
    NoApplicablePairsError,
    NumericalDisagreementError,
    OutOfRangeError,
)
from .linalg import projector_difference_norm
from .manifolds import BOX, CIRCLE, ManifoldSample, geodesic_distances

_NORMAL_FLOOR = 1e-12  # pairs with smaller relative normal component are skipped


@dataclass(frozen=True)
class ReachEstimate:
    """Minimum chord/normal quotient over ordered sample pairs."""

    tau_hat: float
    argmin: tuple[int, int]     # (p, q) realizing the minimum; (-1, -1) if flat
    pairs_used: int
    pairs_skipped: int


def estimate_reach(sample: ManifoldSample, chunk: int = 128) -> ReachEstimate:
    """Federer-style reach estimate from a finite sample.

    tau_hat = min over ordered pairs (p, q) of
    ||q - p||^2 / (2 ||(q - p) - proj_{T_p}(q - p)||), skipping pairs
    whose normal component is below 1e-12 * ||q - p||.  The estimate
    never falls below the true reach and decreases monotonically as
    points are added.  Returns +inf for flat samples (all pairs skipped).
    """
    n = len(sample)
    if n < 10:
        raise InsufficientSampleError(f"reach estimation needs at least 10 points, got {n}")
    pts = sample.points
    frames = sample.frames  # (n, K, N)
    best = math.inf
    best_pair = (-1, -1)
    used = 0
    skipped = 0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = slice(start, stop)
        diffs = pts[None, :, :] - pts[block, None, :]              # (c, n, N)
        coefs = np.einsum("ckd,cnd->cnk", frames[block], diffs)    # (c, n, K)
        norm2 = np.einsum("cnd,cnd->cn", diffs, diffs)
        tang2 = np.einsum("cnk,cnk->cn", coefs, coefs)
        perp = np.sqrt(np.maximum(norm2 - tang2, 0.0))
        dist = np.sqrt(norm2)
        valid = norm2 > 0.0
        keep = valid & (perp >= _NORMAL_FLOOR * dist)
        skipped += int(np.count_nonzero(valid & ~keep))
        used += int(np.count_nonzero(keep))
        if not keep.any():
            continue
        quot = np.where(keep, norm2 / (2.0 * np.where(keep, perp, 1.0)), math.inf)
        flat_idx = int(np.argmin(quot))
        val = float(quot.flat[flat_idx])
        if val < best:
            best = val
            ci, qi = np.unravel_index(flat_idx, quot.shape)
            best_pair = (start + int(ci), int(qi))
    return ReachEstimate(tau_hat=best, argmin=best_pair, pairs_used=used, pairs_skipped=skipped)


def principal_angle(frame_p: np.ndarray, frame_q: np.ndarray) -> tuple[float, float]:
    """Largest principal angle between two tangent subspaces.

    Returns (angle, projector_norm) where projector_norm is the
    power-iteration estimate of the operator norm of the projector
    difference; the two routes must agree: sin(angle) == projector_norm
    within 1e-8.
    """
    fp = np.atleast_2d(np.asarray(frame_p, dtype=float))
    fq = np.atleast_2d(np.asarray(frame_q, dtype=float))
    if fp.shape != fq.shape:
        raise InvalidArgumentError(f"frame shapes differ: {fp.shape} vs {fq.shape}")
    cosines = np.linalg.svd(fp @ fq.T, compute_uv=False)
    angle = float(np.arccos(np.clip(cosines.min(), -1.0, 1.0)))
    angle = min(angle, math.pi - angle) if angle > math.pi / 2 else angle
    norm = projector_difference_norm(fp, fq)
    if abs(math.sin(angle) - norm) > 1e-8:
        raise NumericalDisagreementError(
            f"sin(principal angle) = {math.sin(angle):.12g} but projector-difference "
            f"norm = {norm:.12g}"
        )
    return angle, norm


def dirichlet_kernel(n_kernel: int, z) -> np.ndarray:
    """Dirichlet kernel D_N(z) = sin(pi N z) / sin(pi z) on [-1/2, 1/2].

    N must be odd and >= 3; the removable singularity at z = 0 is taken
    to its limit D_N(0) = N.
    """
    if not isinstance(n_kernel, (int, np.integer)) or n_kernel < 3 or n_kernel % 2 == 0:
        raise InvalidArgumentError(f"kernel order must be an odd integer >= 3, got {n_kernel!r}")
    zv = np.asarray(z, dtype=float)
    if np.any(np.abs(zv) > 0.5):
        raise OutOfRangeError("kernel argument must lie in [-1/2, 1/2]")
    den = np.sin(np.pi * zv)
    num = np.sin(np.pi * n_kernel * zv)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(zv == 0.0, float(n_kernel), num / np.where(den == 0.0, 1.0, den))
    return vals if vals.shape else float(vals)


def unit_ball_volume(dimension: int) -> float:
    """Volume of the unit Euclidean ball, with sandwich self-check.

    Computes pi^{K/2} / Gamma(K/2 + 1) and verifies it sits between
    (4 pi / (K + 2))^{K/2} and (2 e pi / (K + 2))^{K/2}.  That bracket
    comes from Gamma-function bounds valid at integer arguments, and its
    lower half is false for K = 1 (2.0466... > 2), so K = 1 is instead
    checked against the exact interval length.
    """
    if not isinstance(dimension, (int, np.integer)) or dimension < 1:
        raise InvalidArgumentError(f"dimension must be a positive integer, got {dimension!r}")
    k = int(dimension)
    vol = math.pi ** (k / 2) / gamma(k / 2 + 1)
    if k == 1:
        if abs(vol - 2.0) > 1e-12:
            raise NumericalDisagreementError(
                f"ball volume {vol:.12g} differs from the exact value 2"
            )
        return vol
    lower = (4 * math.pi / (k + 2)) ** (k / 2)
    upper = (2 * math.e * math.pi / (k + 2)) ** (k / 2)
    if not (lower <= vol * (1 + 1e-12) and vol <= upper * (1 + 1e-12)):
        raise NumericalDisagreementError(
            f"ball volume {vol:.12g} escapes sandwich [{lower:.12g}, {upper:.12g}]"
        )
    return vol


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one executable lemma check."""

    property_id: str
    pairs_tested: int
    worst_slack: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "property_id": self.property_id,
            "pairs_tested": self.pairs_tested,
            "worst_slack": self.worst_slack,
            "passed": self.passed,
            "detail": self.detail,
        }


SLACK_TOL = 1e-9
CURVATURE_ALLOWANCE = 1.05  # discretization allowance for the curvature check

PROPERTY_IDS = ("A.2", "A.4", "A.5", "A.6", "A.8", "A.9", "A.10", "A.11")


def _strided_pairs(n: int, budget: int) -> tuple[np.ndarray, np.ndarray]:
    """Up to `budget` ordered pairs (i < j), evenly strided over all pairs."""
    total = n * (n - 1) // 2
    m = min(budget, total)
    lin = np.unique(np.linspace(0, total - 1, m).astype(np.int64))
    # invert the triangular enumeration: pair (i, j), i < j, at linear index l
    i = (2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * lin)) / 2
    i = np.floor(i).astype(np.int64)
    # guard against float rounding at block boundaries
    base = i * (2 * n - i - 1) // 2
    over = base > lin
    i[over] -= 1
    base = i * (2 * n - i - 1) // 2
    under = lin - base >= (n - 1 - i)
    i[under] += 1
    base = i * (2 * n - i - 1) // 2
    j = lin - base + i + 1
    return i, j


def _resolve_tau(sample: ManifoldSample, tau: Optional[float]) -> float:
    if tau is not None:
        return float(tau)
    if sample.model.tau is not None and math.isfinite(sample.model.tau):
        return float(sample.model.tau)
    est = estimate_reach(sample)
    if not math.isfinite(est.tau_hat):
        raise InvalidArgumentError("sample is flat; lemma checks need a finite tau")
    return est.tau_hat


def check_toolbox_property(
    sample: ManifoldSample,
    property_id: str,
    pair_budget: int = 200_000,
    tau: Optional[float] = None,
) -> PropertyReport:
    """Replay one geometric lemma on the sample and report worst slack.

    slack = bound - observed quantity per tested tuple (so a correct
    inequality yields slack >= 0); the check passes when the worst slack
    is >= -1e-9.  Tuples violating a lemma's preconditions are skipped;
    if none survive, NoApplicablePairsError is raised.
    """
    if property_id not in PROPERTY_IDS:
        raise InvalidArgumentError(
            f"unknown property id {property_id!r}; expected one of {PROPERTY_IDS}"
        )
    if pair_budget < 1:
        raise InvalidArgumentError("pair_budget must be at least 1")
    tau_val = _resolve_tau(sample, tau)
    checker = _CHECKERS[property_id]
    slacks, tested, detail = checker(sample, tau_val, pair_budget)
    if tested == 0:
        raise NoApplicablePairsError(
            f"no sampled tuple satisfies the preconditions of {property_id}"
        )
    worst = float(np.min(slacks))
    return PropertyReport(
        property_id=property_id,
        pairs_tested=tested,
        worst_slack=worst,
        passed=bool(worst >= -SLACK_TOL),
        detail=detail,
    )


def _pair_geometry(sample: ManifoldSample, i: np.ndarray, j: np.ndarray):
    """Chord vectors, lengths, and tangential coefficients at i."""
    d = sample.points[j] - sample.points[i]
    dist = np.linalg.norm(d, axis=1)
    coefs = np.einsum("pkd,pd->pk", sample.frames[i], d)
    tang2 = np.einsum("pk,pk->p", coefs, coefs)
    perp = np.sqrt(np.maximum(dist**2 - tang2, 0.0))
    return d, dist, np.sqrt(np.maximum(tang2, 0.0)), perp


def _check_a2(sample: ManifoldSample, tau: float, budget: int):
    # angle between a chord and the tangent plane at its base is at most
    # arcsin(chord / (2 tau)).  The strict precondition chord < 2 tau
    # cannot be certified in float within a relative sliver of the
    # boundary, and arcsin has an O(sqrt(ulp)) cliff there while the
    # statement degenerates to the trivial angle <= pi/2, so pairs inside
    # that sliver are skipped rather than tested against rounding noise.
    i, j = _strided_pairs(len(sample), budget)
    _, dist, tang, perp = _pair_geometry(sample, i, j)
    keep = (dist > 0) & (dist < 2 * tau * (1.0 - 1e-12))
    angle = np.arctan2(perp[keep], tang[keep])
    bound = np.arcsin(np.clip(dist[keep] / (2 * tau), 0.0, 1.0))
    return bound - angle, int(np.count_nonzero(keep)), f"tau={tau:.6g}"


def _check_a4(sample: ManifoldSample, tau: float, budget: int):
    # curvature of the sampled curve (circumradius of consecutive triples)
    # stays below (1/tau) * allowance
    order = sample.parameter_order
    pts = sample.points[order]
    n = len(pts)
    wrap = sample.model.domain.kinds[0] == CIRCLE
    if wrap:
        trip = [(k, (k + 1) % n, (k + 2) % n) for k in range(n)]
    else:
        trip = [(k, k + 1, k + 2) for k in range(n - 2)]
    stride = max(1, len(trip) // budget)
    trip = trip[::stride][:budget]
    slacks = []
    for a, b, c in trip:
        pa, pb, pc = pts[a], pts[b], pts[c]
        la = np.linalg.norm(pb - pc)
        lb = np.linalg.norm(pa - pc)
        lc = np.linalg.norm(pa - pb)
        if min(la, lb, lc) == 0.0:
            continue
        # curvature = 4 * area / (la lb lc), area via the cross-norm identity
        s = 0.5 * (la + lb + lc)
        area2 = max(s * (s - la) * (s - lb) * (s - lc), 0.0)
        curv = 4.0 * math.sqrt(area2) / (la * lb * lc)
        slacks.append(CURVATURE_ALLOWANCE / tau - curv)
    return np.asarray(slacks), len(slacks), f"tau={tau:.6g}"


def _check_a5(sample: ManifoldSample, tau: float, budget: int):
    # cos(principal tangent angle) >= 1 - d_M / tau
    n = len(sample)
    n_src = max(1, min(n, int(math.isqrt(budget))))
    sources = np.unique(np.linspace(0, n - 1, n_src).astype(int))
    per_src = max(1, budget // len(sources))
    dmat = geodesic_distances(sample, sources)
    slacks = []
    tested = 0
    targets_all = np.unique(np.linspace(0, n - 1, min(n, per_src)).astype(int))
    t_src = sample.frames[sources][:, 0, :]      # K = 1 fast path
    t_tgt = sample.frames[targets_all][:, 0, :]
    cosang = np.abs(t_src @ t_tgt.T)
    for si, s in enumerate(sources):
        mask = targets_all != s
        dm = dmat[si, targets_all[mask]]
        cos_v = np.clip(cosang[si, mask], 0.0, 1.0)
        slacks.append(cos_v - (1.0 - dm / tau))
        tested += int(mask.sum())
    return np.concatenate(slacks), tested, f"tau={tau:.6g}"


def _check_a6(sample: ManifoldSample, tau: float, budget: int):
    # d_M(p, q) <= tau - tau sqrt(1 - 2 ||q - p|| / tau) for close pairs
    n = len(sample)
    n_src = max(1, min(n, int(math.isqrt(budget))))
    sources = np.unique(np.linspace(0, n - 1, n_src).astype(int))
    dmat = geodesic_distances(sample, sources)
    slacks = []
    tested = 0
    for si, s in enumerate(sources):
        chord = np.linalg.norm(sample.points - sample.points[s], axis=1)
        keep = (chord > 0) & (chord <= tau / 2)
        if not keep.any():
            continue
        bound = tau - tau * np.sqrt(np.maximum(1.0 - 2.0 * chord[keep] / tau, 0.0))
        slacks.append(bound - dmat[si, keep])
        tested += int(keep.sum())
    if not slacks:
        return np.asarray([]), 0, ""
    return np.concatenate(slacks), tested, f"tau={tau:.6g}"


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _check_a8(sample: ManifoldSample, tau: float, budget: int):
    # perturbing both chord endpoints by at most r moves the normalized
    # chord direction by at most 4 r / ||a1 - a2||
    n = len(sample)
    shift_pairs = ((1, 1), (1, 3), (5, 2), (max(1, n // 7), max(1, n // 3)))
    per = max(1, budget // len(shift_pairs))
    slacks = []
    tested = 0
    for shift1, shift2 in shift_pairs:
        i, j = _strided_pairs(n, per)
        b1 = (i + shift1) % n
        b2 = (j + shift2) % n
        keep = (i != j) & (b1 != b2)
        ii, jj, b1, b2 = i[keep], j[keep], b1[keep], b2[keep]
        a_dir = sample.points[jj] - sample.points[ii]
        b_dir = sample.points[b2] - sample.points[b1]
        la = np.linalg.norm(a_dir, axis=1)
        lb = np.linalg.norm(b_dir, axis=1)
        r = np.maximum(
            np.linalg.norm(sample.points[b1] - sample.points[ii], axis=1),
            np.linalg.norm(sample.points[b2] - sample.points[jj], axis=1),
        )
        keep = (la > 0) & (lb > 0) & (r > 0)
        diff = np.linalg.norm(_unit(a_dir[keep]) - _unit(b_dir[keep]), axis=1)
        bound = 4.0 * r[keep] / la[keep]
        slacks.append(bound - diff)
        tested += int(np.count_nonzero(keep))
    return np.concatenate(slacks), tested, ""


def _check_a9(sample: ManifoldSample, tau: float, budget: int):
    # tangent projectors at points l1 apart differ by at most sqrt(2 l1 / tau)
    i, j = _strided_pairs(len(sample), budget)
    chord = np.linalg.norm(sample.points[j] - sample.points[i], axis=1)
    keep = chord < tau / 2
    i, j, chord = i[keep], j[keep], chord[keep]
    # K = 1: operator norm of the projector difference is sin of the angle
    tp = sample.frames[i][:, 0, :]
    tq = sample.frames[j][:, 0, :]
    cos = np.clip(np.abs(np.einsum("pd,pd->p", tp, tq)), 0.0, 1.0)
    sin = np.sqrt(1.0 - cos**2)
    bound = np.sqrt(2.0 * chord / tau)
    return bound - sin, int(len(chord)), f"tau={tau:.6g}"


def _check_a10(sample: ManifoldSample, tau: float, budget: int):
    # chord directions near p stay close to their projection onto T_p
    order = sample.parameter_order
    n = len(order)
    wrap = sample.model.domain.kinds[0] == CIRCLE
    steps = (1, 2, 5, 13)
    base = np.unique(np.linspace(0, n - 1, max(1, budget // (2 * len(steps) ** 2))).astype(int))
    slacks = []
    tested = 0
    for s1 in steps:
        for s2 in steps:
            if wrap:
                p = order[base]
                x1 = order[(base + s1) % n]
                x2 = order[(base + s1 + s2) % n]
            else:
                sel = base[base + s1 + s2 < n]
                if len(sel) == 0:
                    continue
                p = order[sel]
                x1 = order[sel + s1]
                x2 = order[sel + s2 + s1]
            l1 = np.linalg.norm(sample.points[x1] - sample.points[p], axis=1)
            chord = sample.points[x2] - sample.points[x1]
            l2 = np.linalg.norm(chord, axis=1)
            keep = (l1 < tau / 2) & (l2 > 0) & (l2 < tau / 2)
            if not keep.any():
                continue
            u = _unit(chord[keep])
            tp = sample.frames[p[keep]][:, 0, :]
            coef = np.einsum("pd,pd->p", u, tp)
            resid = np.linalg.norm(u - coef[:, None] * tp, axis=1)
            bound = np.sqrt(2.0 * l1[keep] / tau) + l2[keep] / (2.0 * tau)
            slacks.append(bound - resid)
            tested += int(keep.sum())
    if not slacks:
        return np.asarray([]), 0, ""
    return np.concatenate(slacks), tested, f"tau={tau:.6g}"


def _ball_arc_length(sample: ManifoldSample, center: int, r: float) -> float:
    """Polyline length of the sample curve inside the ball B(center, r).

    Interpolates the exact chord crossing at the ball boundary, so the
    value underestimates the true arc length only through chord-vs-arc
    shortfall (second order in the sample spacing).  K = 1 only.
    """
    order = sample.parameter_order
    pts = sample.points[order]
    n = len(pts)
    c = sample.points[center]
    wrap = sample.model.domain.kinds[0] == CIRCLE
    dist = np.linalg.norm(pts - c, axis=1)
    inside = dist < r
    nxt = np.roll(np.arange(n), -1)
    seg_last = n if wrap else n - 1
    in_a = inside[:seg_last]
    in_b = inside[nxt[:seg_last]]
    seg_len = np.linalg.norm(pts[nxt[:seg_last]] - pts[:seg_last], axis=1)
    total = float(seg_len[in_a & in_b].sum())
    # segments that may cross the boundary, including grazing chords whose
    # endpoints are both outside
    near = np.minimum(dist[:seg_last], dist[nxt[:seg_last]]) < r + seg_len
    for k in np.nonzero(~(in_a & in_b) & near)[0]:
        a = pts[k]
        b = pts[nxt[k]]
        seg = b - a
        f = a - c
        aa = float(seg @ seg)
        bb = 2.0 * float(f @ seg)
        cc = float(f @ f) - r * r
        disc = bb * bb - 4 * aa * cc
        if disc <= 0 or aa == 0.0:
            continue
        sq = math.sqrt(disc)
        t_lo, t_hi = sorted(((-bb - sq) / (2 * aa), (-bb + sq) / (2 * aa)))
        lo, hi = max(t_lo, 0.0), min(t_hi, 1.0)
        if hi > lo:
            total += (hi - lo) * math.sqrt(aa)
    return total


def _check_a11(sample: ManifoldSample, tau: float, budget: int):
    # 1-D volume (arc length) of the manifold inside B(p, r) is at least
    # sqrt(1 - r^2 / (4 tau^2)) * 2 r for r <= tau / 4
    if sample.model.dimension != 1:
        raise InvalidArgumentError("the ball-volume check supports 1-D manifolds only")
    n = len(sample)
    radii = (tau / 4.0, tau / 12.0)
    # each (center, radius) evaluation scans the whole polyline once
    n_centers = max(1, min(n, budget // max(1, len(radii) * n)))
    n_centers = max(n_centers, 25) if n >= 25 else n
    centers = np.unique(np.linspace(0, n - 1, n_centers).astype(int))
    slacks = []
    for center in centers:
        for r in radii:
            vol = _ball_arc_length(sample, int(center), r)
            bound = math.sqrt(max(1.0 - r * r / (4 * tau * tau), 0.0)) * 2.0 * r
            slacks.append(vol - bound)
    return np.asarray(slacks), len(slacks), f"tau={tau:.6g}"


_CHECKERS = {
    "A.2": _check_a2,
    "A.4": _check_a4,
    "A.5": _check_a5,
    "A.6": _check_a6,
    "A.8": _check_a8,
    "A.9": _check_a9,
    "A.10": _check_a10,
    "A.11": _check_a11,
}


def run_toolbox_suite(
    sample: ManifoldSample,
    pair_budget: int = 200_000,
    tau: Optional[float] = None,
    property_ids: tuple[str, ...] = PROPERTY_IDS,
) -> list[PropertyReport]:
    """All lemma checks on one sample, in canonical order."""
    return [
        check_toolbox_property(sample, pid, pair_budget=pair_budget, tau=tau)
        for pid in property_ids
    ]
