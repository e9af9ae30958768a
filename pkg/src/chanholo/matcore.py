"""Dense complex linear-algebra kernel.

Polar unitary factor, positive square roots, rank estimation, the
``AQ + QA = S`` solve and path-ordered exponentials. Matrices are plain
complex ``numpy`` arrays throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EmptyPath,
    NegativeEigenvalue,
    NonMonotoneGrid,
    NotAntiHermitian,
    NotHermitian,
    NotPositive,
    RankDeficient,
    ZeroInput,
)

RANK_TOL = 1e-10
DEFAULT_STEPS = 1024


def dag(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def as_matrix(x) -> np.ndarray:
    m = np.asarray(x, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


@dataclass(frozen=True)
class PolarFactorResult:
    """``X = positive_part @ unitary`` with ``positive_part = sqrt(X X^dag)``."""

    unitary: np.ndarray
    positive_part: np.ndarray
    singular_values: np.ndarray


def polar_unitary(x, rank_tol: float = RANK_TOL, scale: float = 0.0) -> PolarFactorResult:
    """Left polar decomposition of a full-rank square matrix.

    The unitary factor is ``U V^dag`` from the SVD ``X = U S V^dag``, so that
    ``X = sqrt(X X^dag) Phi(X)``.

    ``scale`` is a reference magnitude for ``X``: the rank test is
    ``sigma_min <= rank_tol * max(sigma_max, scale)``. Without it a 1x1 input
    of size 1e-17 would count as full rank.

    Raises
    ------
    RankDeficient
        If ``sigma_min <= rank_tol * max(sigma_max, scale)``.
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise ValueError(f"polar_unitary needs a square matrix, got {x.shape}")
    u, s, vh = np.linalg.svd(x)
    smax = s[0] if s.size else 0.0
    smin = s[-1] if s.size else 0.0
    if smax == 0.0 or smin <= rank_tol * max(smax, scale):
        raise RankDeficient(smin, smax, singular_values=s)
    unitary = u @ vh
    positive = (u * s) @ dag(u)
    return PolarFactorResult(unitary, 0.5 * (positive + dag(positive)), s)


def phi(x, rank_tol: float = RANK_TOL, scale: float = 0.0) -> np.ndarray:
    """Shorthand for the unitary polar factor."""
    return polar_unitary(x, rank_tol, scale).unitary


def polar_phase(z: complex, tiny: float = 1e-300) -> complex:
    """``z/|z|`` for nonzero ``z``."""
    a = abs(z)
    if a <= tiny:
        raise ZeroInput(f"polar phase of {z!r} is undefined")
    return complex(z) / a


def is_hermitian(m, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, np.linalg.norm(m))
    return bool(np.linalg.norm(m - dag(m)) <= tol * scale)


hermitian_check = is_hermitian


def rank_estimate(m, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def matrix_sqrt_posdef(m, tol: float = 1e-10) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitian("matrix_sqrt_posdef needs a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (m + dag(m)))
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol * scale:
        raise NegativeEigenvalue(f"min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dag(v)


def min_eigenvalue(h) -> float:
    h = as_matrix(h)
    return float(np.linalg.eigvalsh(0.5 * (h + dag(h)))[0])


def is_positive_definite(t, tol: float = 1e-10) -> bool:
    """Two-sided test: Hermitian within ``tol*||T||`` and eigenvalues above ``tol*||T||``."""
    t = as_matrix(t)
    nrm = np.linalg.norm(t)
    if nrm == 0.0 or t.shape[0] != t.shape[1]:
        return False
    if np.linalg.norm(t - dag(t)) > tol * nrm:
        return False
    return min_eigenvalue(t) > tol * nrm


def solve_gauge_equation(q, s, pos_tol: float = 1e-12, tol: float = 1e-9) -> np.ndarray:
    """Unique anti-Hermitian ``A`` with ``A Q + Q A = S``.

    ``Q`` must be Hermitian positive definite and ``S`` anti-Hermitian. The
    solve runs in the eigenbasis of ``Q``, ``A'_ij = S'_ij / (q_i + q_j)``.
    """
    q = as_matrix(q)
    s = as_matrix(s)
    if q.shape != s.shape or q.shape[0] != q.shape[1]:
        raise ValueError(f"shape mismatch: Q {q.shape}, S {s.shape}")
    if not is_hermitian(q, tol):
        raise NotHermitian("Q must be Hermitian")
    snorm = np.linalg.norm(s)
    if snorm > 0 and np.linalg.norm(s + dag(s)) > tol * snorm:
        raise NotAntiHermitian("S must be anti-Hermitian")
    w, v = np.linalg.eigh(0.5 * (q + dag(q)))
    if w[0] <= pos_tol:
        raise NotPositive(w[0])
    sp = dag(v) @ s @ v
    ap = sp / (w[:, None] + w[None, :])
    a = v @ ap @ dag(v)
    return 0.5 * (a - dag(a))


def expm_antihermitian(a: np.ndarray) -> np.ndarray:
    """``exp(A)`` for anti-Hermitian ``A`` via the eigendecomposition of ``iA``."""
    h = 1j * a
    w, v = np.linalg.eigh(0.5 * (h + dag(h)))
    return (v * np.exp(-1j * w)) @ dag(v)


def _check_grid(s: np.ndarray) -> None:
    if s.size == 0:
        raise EmptyPath("no samples")
    if s.size > 1 and np.any(np.diff(s) <= 0):
        raise NonMonotoneGrid("sample points must be strictly increasing")


def path_ordered_exponential(samples: Sequence[tuple[float, np.ndarray]], right: bool = False) -> np.ndarray:
    """``P exp(int A ds)`` from sampled generators.

    Each interval contributes ``exp(A_mid * ds)`` with ``A_mid`` the average of
    the two bracketing samples. Later factors multiply on the left (solution of
    ``dU/ds = A U``) unless ``right`` is set (``dU/ds = U A``).
    """
    if len(samples) == 0:
        raise EmptyPath("no samples")
    s = np.array([float(p[0]) for p in samples])
    _check_grid(s)
    mats = [as_matrix(p[1]) for p in samples]
    out = np.eye(mats[0].shape[0], dtype=complex)
    for j in range(len(mats) - 1):
        step = expm_antihermitian(0.5 * (mats[j] + mats[j + 1]) * (s[j + 1] - s[j]))
        out = out @ step if right else step @ out
    return out


def path_ordered_exponential_fn(
    gen: Callable[[float], np.ndarray],
    s0: float = 0.0,
    s1: float = 1.0,
    steps: int = DEFAULT_STEPS,
    right: bool = False,
) -> np.ndarray:
    """Midpoint product integrator for a generator given as a function of ``s``."""
    if steps < 1:
        raise EmptyPath("steps must be positive")
    if s1 < s0:
        raise NonMonotoneGrid("s1 < s0")
    h = (s1 - s0) / steps
    out = None
    for j in range(steps):
        step = expm_antihermitian(as_matrix(gen(s0 + (j + 0.5) * h)) * h)
        if out is None:
            out = step
        else:
            out = out @ step if right else step @ out
    return out


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from QR of a Ginibre matrix with phase-fixed ``R``."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_antihermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z - dag(z))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of an operator on a tensor product, keeping subsystems ``keep``."""
    dims = list(dims)
    n = len(dims)
    t = rho.reshape(dims + dims)
    trace_out = [i for i in range(n) if i not in keep]
    # contract highest index first so the remaining axis numbers stay valid
    for i in sorted(trace_out, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    k = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(k, k)
