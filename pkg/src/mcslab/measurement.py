"""Random measurement operators and embedding diagnostics.

Gaussian operators with entries N(0, 1/M) drawn from the counter-based
PRNG, the closed-form measurement bound, empirical distortion and tail
checks, extremal singular values by power iteration, and the chaining
failure certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import (
    InvalidArgumentError,
    OutOfRangeError,
    UnsupportedShapeError,
)
from .linalg import extremal_eigenvalues_gram
from .rng import standard_normals

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .nets import SecantSample


def volume_reach_assumption_ok(dim: int, tau: float, volume: float) -> bool:
    """Volume-to-reach richness condition V / tau^K >= (21 / (2 sqrt K))^K."""
    return volume / tau**dim >= (21.0 / (2.0 * math.sqrt(dim))) ** dim


@dataclass(frozen=True)
class MeasurementOperator:
    """Dense Gaussian operator with its regeneration coordinates."""

    matrix: np.ndarray
    m_rows: int
    n_cols: int
    seed: int
    trial: int = 0

    def apply(self, x: np.ndarray) -> np.ndarray:
        return apply_operator(self, x)


def draw_gaussian_operator(
    m_rows: int, n_cols: int, seed: int, trial: int = 0
) -> MeasurementOperator:
    """M x N operator with i.i.d. N(0, 1/M) entries.

    Entry (row, col) sits at Philox stream position row * N + col inside
    the (seed, trial) counter block, so the same coordinates always
    regenerate the same matrix bit for bit.
    """
    if m_rows < 1 or n_cols < 1:
        raise InvalidArgumentError(f"operator shape ({m_rows}, {n_cols}) must be positive")
    flat = standard_normals(seed, m_rows * n_cols, trial=trial)
    matrix = (flat / math.sqrt(m_rows)).reshape(m_rows, n_cols)
    return MeasurementOperator(
        matrix=matrix, m_rows=m_rows, n_cols=n_cols, seed=int(seed), trial=int(trial)
    )


def apply_operator(op: MeasurementOperator, x: np.ndarray) -> np.ndarray:
    """Phi @ x for a vector (N,) or a stack (batch, N) -> (batch, M)."""
    xv = np.asarray(x, dtype=float)
    if xv.shape[-1] != op.n_cols:
        raise InvalidArgumentError(
            f"input has {xv.shape[-1]} coordinates, operator expects {op.n_cols}"
        )
    return xv @ op.matrix.T


@dataclass(frozen=True)
class BoundReport:
    """Closed-form measurement count for a stable embedding."""

    m_min: int
    geometry_term: float
    probability_term: float
    branch: str                  # "geometry" | "probability"
    assumption_ok: bool
    k_dim: int
    tau: float
    volume: float
    epsilon: float
    rho: float

    def to_dict(self) -> dict:
        return {
            "m_min": self.m_min,
            "geometry_term": self.geometry_term,
            "probability_term": self.probability_term,
            "branch": self.branch,
            "assumption_ok": self.assumption_ok,
            "K": self.k_dim,
            "tau": self.tau,
            "volume": self.volume,
            "epsilon": self.epsilon,
            "rho": self.rho,
        }


def required_measurements(
    k_dim: int, tau: float, volume: float, epsilon: float, rho: float
) -> BoundReport:
    """Smallest M with
    M >= 18 eps^-2 max(24 K + 2 K ln(sqrt K / (tau eps^2)) + ln(2 V^2), ln(8/rho)).

    Natural logarithms throughout.  Violation of the volume-to-reach
    assumption only clears `assumption_ok`; the count stays computable.
    """
    if not isinstance(k_dim, (int, np.integer)) or k_dim < 1:
        raise InvalidArgumentError(f"K must be a positive integer, got {k_dim!r}")
    if not tau > 0 or not math.isfinite(tau):
        raise InvalidArgumentError(f"tau must be finite positive, got {tau}")
    if not volume > 0 or not math.isfinite(volume):
        raise InvalidArgumentError(f"volume must be finite positive, got {volume}")
    if not 0 < epsilon <= 1 / 3:
        raise OutOfRangeError(f"epsilon must lie in (0, 1/3], got {epsilon}")
    if not 0 < rho < 1:
        raise OutOfRangeError(f"rho must lie in (0, 1), got {rho}")
    k = int(k_dim)
    geometry = (
        24 * k
        + 2 * k * math.log(math.sqrt(k) / (tau * epsilon**2))
        + math.log(2 * volume**2)
    )
    probability = math.log(8 / rho)
    value = 18 / epsilon**2 * max(geometry, probability)
    return BoundReport(
        m_min=math.ceil(value),
        geometry_term=geometry,
        probability_term=probability,
        branch="geometry" if geometry >= probability else "probability",
        assumption_ok=volume_reach_assumption_ok(k, tau, volume),
        k_dim=k,
        tau=float(tau),
        volume=float(volume),
        epsilon=float(epsilon),
        rho=float(rho),
    )


@dataclass(frozen=True)
class DistortionReport:
    """Worst multiplicative distortion of unit secants under Phi."""

    eps_hat: float               # max over directions and surrogates
    eps_secant: float            # max over true chord directions
    eps_surrogate: Optional[float]   # max over tangent surrogates, if any
    count: int
    argmax_pair: tuple[int, int]
    argmax_kind: str             # "secant" | "surrogate"

    def to_dict(self) -> dict:
        return {
            "eps_hat": self.eps_hat,
            "eps_secant": self.eps_secant,
            "eps_surrogate": self.eps_surrogate,
            "count": self.count,
            "argmax_pair": list(self.argmax_pair),
            "argmax_kind": self.argmax_kind,
        }


def embedding_distortion(op: MeasurementOperator, secants: "SecantSample") -> DistortionReport:
    """eps_hat = max |  ||Phi u|| - 1  | over stored unit directions.

    Both the true chord directions and the short-chord tangent
    surrogates enter the overall maximum; the two class maxima are also
    reported separately.
    """
    if len(secants) == 0:
        raise InvalidArgumentError("secant sample is empty")
    dev_sec = np.abs(np.linalg.norm(apply_operator(op, secants.directions), axis=1) - 1.0)
    i_sec = int(np.argmax(dev_sec))
    eps_secant = float(dev_sec[i_sec])
    eps_hat = eps_secant
    argmax_pair = tuple(int(v) for v in secants.pairs[i_sec])
    argmax_kind = "secant"
    eps_surr = None
    if len(secants.surrogates):
        dev_sur = np.abs(np.linalg.norm(apply_operator(op, secants.surrogates), axis=1) - 1.0)
        i_sur = int(np.argmax(dev_sur))
        eps_surr = float(dev_sur[i_sur])
        if eps_surr > eps_hat:
            eps_hat = eps_surr
            argmax_pair = tuple(int(v) for v in secants.surrogate_pairs[i_sur])
            argmax_kind = "surrogate"
    return DistortionReport(
        eps_hat=eps_hat,
        eps_secant=eps_secant,
        eps_surrogate=eps_surr,
        count=len(secants) + len(secants.surrogates),
        argmax_pair=argmax_pair,
        argmax_kind=argmax_kind,
    )


@dataclass(frozen=True)
class TailReport:
    """Empirical norm-tail frequencies against their closed-form bounds."""

    m_rows: int
    lam: float
    lam_prime: float
    trials: int
    freq_two_sided: float
    bound_two_sided: float
    freq_one_sided: float
    bound_one_sided: float
    passed_two_sided: bool
    passed_one_sided: bool

    @property
    def passed(self) -> bool:
        return self.passed_two_sided and self.passed_one_sided

    def to_dict(self) -> dict:
        return {
            "M": self.m_rows,
            "lambda": self.lam,
            "lambda_prime": self.lam_prime,
            "trials": self.trials,
            "freq_two_sided": self.freq_two_sided,
            "bound_two_sided": self.bound_two_sided,
            "freq_one_sided": self.freq_one_sided,
            "bound_one_sided": self.bound_one_sided,
            "passed": self.passed,
        }


def _binomial_margin(bound: float, trials: int) -> float:
    p = min(bound, 1.0)
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


def empirical_tail_check(
    m_rows: int,
    lam: float,
    lam_prime: float,
    trials: int,
    seed: int,
) -> TailReport:
    """Monte Carlo check of the Gaussian norm tails for a fixed unit y.

    Each trial draws a fresh operator block and records ||Phi y||; by
    rotation invariance this equals M i.i.d. N(0, 1/M) entries (taken
    here literally as y = e_1 with one column).  Frequencies must stay
    within bound + 3 * binomial standard error, the error evaluated at
    the bound (clamped at 1 when the bound is vacuous).
    """
    if trials < 1000:
        raise InvalidArgumentError(f"need at least 1000 trials, got {trials}")
    if m_rows < 1:
        raise InvalidArgumentError("M must be positive")
    if not 0 < lam <= 1 / 3:
        raise OutOfRangeError(f"lambda must lie in (0, 1/3], got {lam}")
    if not lam_prime >= 1 / 5:
        raise OutOfRangeError(f"lambda-prime must be at least 1/5, got {lam_prime}")
    exceed_two = 0
    exceed_one = 0
    for trial in range(trials):
        col = draw_gaussian_operator(m_rows, 1, seed, trial=trial)
        norm = float(np.linalg.norm(col.matrix))
        if abs(norm - 1.0) > lam:
            exceed_two += 1
        if norm > 1.0 + lam_prime:
            exceed_one += 1
    bound_two = 2.0 * math.exp(-m_rows * lam**2 / 6.0)
    bound_one = math.exp(-m_rows * lam_prime / 7.0)
    freq_two = exceed_two / trials
    freq_one = exceed_one / trials
    return TailReport(
        m_rows=m_rows,
        lam=lam,
        lam_prime=lam_prime,
        trials=trials,
        freq_two_sided=freq_two,
        bound_two_sided=bound_two,
        freq_one_sided=freq_one,
        bound_one_sided=bound_one,
        passed_two_sided=freq_two <= bound_two + _binomial_margin(bound_two, trials),
        passed_one_sided=freq_one <= bound_one + _binomial_margin(bound_one, trials),
    )


@dataclass(frozen=True)
class SingularValueReport:
    """Extremal singular values with the Gaussian comparison bounds."""

    sigma_max: float
    sigma_min: float
    tolerance: float
    upper_bound: float           # sqrt(N/M) + 2
    lower_bound: float           # sqrt(N/M) - 2 (may be negative, vacuous)
    upper_ok: bool
    lower_ok: bool

    def to_dict(self) -> dict:
        return {
            "sigma_max": self.sigma_max,
            "sigma_min": self.sigma_min,
            "tolerance": self.tolerance,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "upper_ok": self.upper_ok,
            "lower_ok": self.lower_ok,
        }


def singular_value_range(op: MeasurementOperator, tol: float = 1e-8) -> SingularValueReport:
    """sigma_max via power iteration on Phi Phi^T, sigma_min via inverse
    iteration, both to relative tolerance `tol`; requires M <= N.
    """
    if op.m_rows > op.n_cols:
        raise UnsupportedShapeError(
            f"operator is {op.m_rows} x {op.n_cols}; the spectral range needs M <= N"
        )
    gram = op.matrix @ op.matrix.T
    lam_max, lam_min = extremal_eigenvalues_gram(gram, tol=tol)
    sigma_max = math.sqrt(max(lam_max, 0.0))
    sigma_min = math.sqrt(max(lam_min, 0.0))
    ratio = math.sqrt(op.n_cols / op.m_rows)
    upper = ratio + 2.0
    lower = ratio - 2.0
    return SingularValueReport(
        sigma_max=sigma_max,
        sigma_min=sigma_min,
        tolerance=tol,
        upper_bound=upper,
        lower_bound=lower,
        upper_ok=sigma_max <= upper,
        lower_ok=sigma_min >= lower,
    )


@dataclass(frozen=True)
class ChainCertificate:
    """Union-bound failure certificate for the embedding chaining argument."""

    total: float
    level_terms: tuple[float, ...]   # base term followed by per-level terms
    remainder: float
    m_rows: int
    depth: int
    epsilon: float
    epsilon1: float
    delta: float
    assumption_ok: bool
    informative: bool                # total < 1
    chain_weight_sum: float

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "level_terms": list(self.level_terms),
            "remainder": self.remainder,
            "M": self.m_rows,
            "depth": self.depth,
            "epsilon": self.epsilon,
            "epsilon1": self.epsilon1,
            "delta": self.delta,
            "assumption_ok": self.assumption_ok,
            "informative": self.informative,
            "chain_weight_sum": self.chain_weight_sum,
        }


def chaining_failure_bound(
    k_dim: int,
    tau: float,
    volume: float,
    epsilon: float,
    m_rows: int,
    depth: int = 60,
) -> ChainCertificate:
    """Failure probability certificate at M measurements.

    total = 4 N0 e^{-M eps1^2 / 7} + 2 sum_j N_{j+1}^2 e^{-(2j+1) M / 7}
    with eps1 = 9 eps / 10, delta = eps / 160, and per-level counts
    N_j = 2 * 4^{2jK} (6.12 sqrt K / delta^2)^{2K} (V / tau^K)^2.
    Terms beyond `depth` are covered by a geometric remainder with ratio
    4^{4K} e^{-2M/7}.  Also validates the chain-weight identity
    sum_j (j+1) 2^{-j-2} = 1 at the requested depth.
    """
    if not isinstance(k_dim, (int, np.integer)) or k_dim < 1:
        raise InvalidArgumentError(f"K must be a positive integer, got {k_dim!r}")
    if not tau > 0 or not math.isfinite(tau):
        raise InvalidArgumentError(f"tau must be finite positive, got {tau}")
    if not volume > 0:
        raise InvalidArgumentError(f"volume must be positive, got {volume}")
    if not 0 < epsilon <= 1 / 3:
        raise OutOfRangeError(f"epsilon must lie in (0, 1/3], got {epsilon}")
    if m_rows < 1:
        raise InvalidArgumentError("M must be positive")
    if depth < 0:
        raise InvalidArgumentError("depth must be nonnegative")
    k = int(k_dim)
    eps1 = 0.9 * epsilon
    delta = epsilon / 160.0

    weights = [(j + 1) * 2.0 ** (-j - 2) for j in range(depth + 1)]
    chain_weight_sum = math.fsum(weights)
    if depth >= 60 and abs(chain_weight_sum - 1.0) > 1e-12:
        from .errors import NumericalDisagreementError

        raise NumericalDisagreementError(
            f"chain weights sum to {chain_weight_sum!r} at depth {depth}, not 1"
        )

    def log_count(j: int) -> float:
        return (
            math.log(2.0)
            + 2 * j * k * math.log(4.0)
            + 2 * k * math.log(6.12 * math.sqrt(k) / delta**2)
            + 2 * math.log(volume / tau**k)
        )

    def safe_exp(logv: float) -> float:
        if logv > 700.0:
            return math.inf
        if logv < -745.0:
            return 0.0
        return math.exp(logv)

    base = safe_exp(math.log(4.0) - m_rows * eps1**2 / 7.0 + log_count(0))
    terms = [base]
    for j in range(depth + 1):
        terms.append(safe_exp(math.log(2.0) + 2 * log_count(j + 1) - (2 * j + 1) * m_rows / 7.0))
    ratio = safe_exp(4 * k * math.log(4.0) - 2 * m_rows / 7.0)
    if ratio < 1.0:
        tail_first = safe_exp(
            math.log(2.0) + 2 * log_count(depth + 2) - (2 * (depth + 1) + 1) * m_rows / 7.0
        )
        remainder = tail_first / (1.0 - ratio)
    else:
        remainder = math.inf
    total = math.fsum(terms) + remainder if math.isfinite(remainder) else math.inf
    return ChainCertificate(
        total=total,
        level_terms=tuple(terms),
        remainder=remainder,
        m_rows=m_rows,
        depth=depth,
        epsilon=epsilon,
        epsilon1=eps1,
        delta=delta,
        assumption_ok=volume_reach_assumption_ok(k, tau, volume),
        informative=bool(total < 1.0),
        chain_weight_sum=chain_weight_sum,
    )
