"""Small in-package spectral iterations.

Extremal singular values and projector norms are computed with hand
power iteration rather than a dense SVD so that the laboratory's main
routes stay independent of the LAPACK oracle used in the test suite.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DegenerateSpectrumError


def power_iteration_symmetric(
    matvec: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 20000,
) -> float:
    """Largest eigenvalue (by value) of a symmetric PSD operator.

    Stops when the Rayleigh quotient is stable to `tol` relative.  The
    caller must supply a start vector with a component along the top
    eigenspace; for the uses in this package such a vector is available
    analytically.
    """
    v = np.asarray(v0, dtype=float).copy()
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise DegenerateSpectrumError("power iteration start vector is zero")
    v /= nrm
    lam = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        lam_new = float(v @ w)
        wn = np.linalg.norm(w)
        if wn == 0.0:
            return 0.0
        v = w / wn
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam


def extremal_eigenvalues_gram(gram: np.ndarray, tol: float = 1e-8) -> tuple[float, float]:
    """(largest, smallest) eigenvalue of a symmetric PSD Gram matrix.

    Largest via power iteration, smallest via inverse iteration with a
    Cholesky solve; raises DegenerateSpectrumError when the matrix is
    singular (rank-deficient spectrum).
    """
    m = gram.shape[0]
    ones = np.ones(m) / np.sqrt(m)
    lam_max = power_iteration_symmetric(lambda v: gram @ v, gram @ ones + ones, tol=tol)
    if lam_max <= 0.0:
        raise DegenerateSpectrumError("matrix has no positive spectrum")
    try:
        factor = cho_factor(gram, check_finite=False)
    except LinAlgError as exc:
        raise DegenerateSpectrumError("Gram matrix is numerically singular") from exc
    # inverse iteration: top eigenvalue of gram^{-1} is 1/lam_min
    inv_top = power_iteration_symmetric(
        lambda v: cho_solve(factor, v, check_finite=False),
        cho_solve(factor, ones, check_finite=False),
        tol=tol,
    )
    if inv_top <= 0.0:
        raise DegenerateSpectrumError("inverse iteration found no positive eigenvalue")
    return lam_max, 1.0 / inv_top


def projector_difference_norm(
    frame_p: np.ndarray, frame_q: np.ndarray, tol: float = 1e-10
) -> float:
    """Operator norm of the difference of two tangent projectors.

    Matrix-free power iteration on A^2 with A = P_p - P_q; A^2 maps the
    span of both frames to itself, so any start vector inside that span
    converges.  Returns sqrt(lambda_max(A^2)) in [0, 1].
    """
    fp = np.atleast_2d(np.asarray(frame_p, dtype=float))
    fq = np.atleast_2d(np.asarray(frame_q, dtype=float))

    def apply_a(v: np.ndarray) -> np.ndarray:
        return fp.T @ (fp @ v) - fq.T @ (fq @ v)

    v0 = fp.sum(axis=0) + fq.sum(axis=0)
    if np.linalg.norm(apply_a(v0)) <= 1e-15:
        alt = fp.sum(axis=0) - fq.sum(axis=0)
        if np.linalg.norm(apply_a(alt)) <= 1e-15:
            return 0.0
        v0 = alt
    lam = power_iteration_symmetric(lambda v: apply_a(apply_a(v)), v0, tol=tol)
    return float(np.sqrt(max(lam, 0.0)))
