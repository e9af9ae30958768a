"""Smooth one-parameter channel families: gauge potential and holonomy."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from .discrete import ChannelSequence, holonomy, overlap
from .errors import DerivativeUnavailable, IntegratorFailure, NotPositive, RankDeficient, XNormOne
from .kraus import I2, PAULIS, KrausRep
from .matcore import (
    DEFAULT_STEPS,
    RANK_TOL,
    as_matrix,
    dag,
    expm_antihermitian,
    min_eigenvalue,
    path_ordered_exponential_fn,
    phi,
    polar_phase,
    polar_unitary,
    random_antihermitian,
    solve_gauge_equation,
)

FD_STEP = 1e-5
SCHRODINGER_STEPS = 4096
REUNITARIZE_EVERY = 64


class ChannelPath:
    """Smooth family ``s -> {E_k(s)}`` of Kraus representations on ``[0, 1]``.

    ``ops_at(s)`` returns a ``(K, D, D)`` array. Without an analytic
    ``deriv_at`` the derivative is a fourth-order central difference with step
    ``h``, which evaluates the family slightly outside ``[0, 1]`` at the ends.
    """

    def __init__(
        self,
        ops_at: Callable[[float], np.ndarray],
        deriv_at: Optional[Callable[[float], np.ndarray]] = None,
        h: float = FD_STEP,
        name: str = "path",
    ):
        self.ops_at = ops_at
        self.deriv_at_fn = deriv_at
        self.h = h
        self.name = name
        e0 = np.asarray(ops_at(0.0), dtype=complex)
        self.k, self.dim = e0.shape[0], e0.shape[1]

    def kraus_at(self, s: float) -> KrausRep:
        return KrausRep(self.ops_at(s))

    def derivative_at(self, s: float) -> np.ndarray:
        if self.deriv_at_fn is not None:
            return np.asarray(self.deriv_at_fn(s), dtype=complex)
        h = self.h
        if h is None or h <= 0:
            raise DerivativeUnavailable(f"no derivative for path {self.name!r}")
        f = lambda t: np.asarray(self.ops_at(t), dtype=complex)
        return (8 * (f(s + h) - f(s - h)) - (f(s + 2 * h) - f(s - 2 * h))) / (12 * h)

    def regauged(self, v_at: Callable[[float], np.ndarray], vdot_at: Optional[Callable] = None) -> "ChannelPath":
        """Family ``E_k(s) -> sum_l E_l(s) V_lk(s)``."""
        ops = lambda s: np.einsum("lab,lk->kab", self.ops_at(s), v_at(s))
        deriv = None
        if vdot_at is not None:
            deriv = lambda s: np.einsum("lab,lk->kab", self.derivative_at(s), v_at(s)) + np.einsum(
                "lab,lk->kab", self.ops_at(s), vdot_at(s)
            )
        return ChannelPath(ops, deriv, self.h, self.name + "+gauge")

    def discretize(self, n: int) -> ChannelSequence:
        return ChannelSequence(self.kraus_at(s) for s in np.linspace(0.0, 1.0, n))


@dataclass(frozen=True)
class GaugePotentialSample:
    s: float
    q: np.ndarray
    r: np.ndarray
    a: np.ndarray

    def residual(self) -> float:
        """Relative residual of ``A Q + Q A = R - R^dag``."""
        s = self.r - dag(self.r)
        num = np.linalg.norm(self.a @ self.q + self.q @ self.a - s)
        den = np.linalg.norm(s)
        return float(num / den) if den > 0 else float(num)


def qr_matrices(path: ChannelPath, s: float, warn_tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """``Q_kl = Tr(E_k^dag E_l)`` and ``R_kl = Tr(dE_k^dag E_l)`` at ``s``."""
    e = np.asarray(path.ops_at(s), dtype=complex).reshape(path.k, -1)
    de = path.derivative_at(s).reshape(path.k, -1)
    q = e.conj() @ e.T
    r = de.conj() @ e.T
    if abs(np.trace(r).real) > warn_tol * max(1.0, np.linalg.norm(r)):
        warnings.warn(f"Re Tr R = {np.trace(r).real:.3e} at s={s}: family is not trace preserving", stacklevel=2)
    return q, r


def is_parallel_transported(path: ChannelPath, grid: Sequence[float], tol: float = 1e-8) -> bool:
    for s in grid:
        _, r = qr_matrices(path, s)
        if np.linalg.norm(r - dag(r)) > tol * (1 + np.linalg.norm(r)):
            return False
    return True


def gauge_potential(path: ChannelPath, s: float) -> GaugePotentialSample:
    q, r = qr_matrices(path, s)
    try:
        a = solve_gauge_equation(q, r - dag(r))
    except NotPositive as exc:
        raise NotPositive(exc.min_eig, where=s) from None
    return GaugePotentialSample(float(s), q, r, a)


def pauli_coords(m: np.ndarray) -> tuple[complex, np.ndarray]:
    """``m = c0 I + c . sigma`` for a 2x2 matrix."""
    m = as_matrix(m)
    return np.trace(m) / 2, np.array([np.trace(m @ p) / 2 for p in PAULIS])


def gauge_potential_k2_closed_form(q, r, tol: float = 1e-12) -> np.ndarray:
    """Closed-form solution of ``A Q + Q A = R - R^dag`` for ``K = 2``.

    ``Q`` is normalised to ``I + x.sigma`` by its half-trace (which equals one
    only for qubit channels); ``R`` is scaled by the same factor.
    """
    q, r = as_matrix(q), as_matrix(r)
    if q.shape != (2, 2) or r.shape != (2, 2):
        raise ValueError("closed form is for K = 2")
    c, xc = pauli_coords(q)
    c = c.real
    x = xc.real / c
    r0, rc = pauli_coords(r / c)
    z0 = r0.imag
    z = rc.imag
    den = 1.0 - x @ x
    if abs(np.sqrt(x @ x) - 1.0) < tol:
        raise XNormOne(f"|x| = {np.sqrt(x @ x)}")
    u0 = (z0 - x @ z) / den
    u = (z - z0 * x + np.cross(x, np.cross(x, z))) / den
    return 1j * u0 * I2 + 1j * sum(ui * p for ui, p in zip(u, PAULIS))


def endpoint_overlap(path: ChannelPath) -> np.ndarray:
    """``T_01`` with entries ``Tr(E_k(0)^dag E_l(1))``."""
    return overlap(path.kraus_at(0.0), path.kraus_at(1.0))


def transport_matrix(path: ChannelPath, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """``P exp(int_0^1 A ds)`` by the midpoint product rule."""
    return path_ordered_exponential_fn(lambda s: gauge_potential(path, s).a, 0.0, 1.0, steps)


def smooth_holonomy(path: ChannelPath, steps: int = DEFAULT_STEPS, rank_tol: float = RANK_TOL) -> np.ndarray:
    """``Phi(T_01) P exp(int A ds)``."""
    closing = phi(endpoint_overlap(path), rank_tol, path.dim)
    return closing @ transport_matrix(path, steps)


def unitary_family_holonomy(
    hamiltonian: Callable[[float], np.ndarray],
    u0=None,
    steps: int = SCHRODINGER_STEPS,
    unitarity_tol: float = 1e-9,
) -> complex:
    """Holonomy of the unitary family solving ``i dU/ds = H(s) U``, ``U(0) = U0``.

    Exponential-midpoint stepping with polar re-projection every 64 steps.
    The accumulated ``(1/D) int Tr H`` is removed as the dynamical phase.
    """
    u0 = np.eye(as_matrix(hamiltonian(0.0)).shape[0], dtype=complex) if u0 is None else as_matrix(u0)
    d = u0.shape[0]
    u, _ = evolve_unitary(hamiltonian, u0, steps, unitarity_tol)
    h = 1.0 / steps
    tr_int = sum(np.trace(as_matrix(hamiltonian((j + 0.5) * h))).real for j in range(steps)) * h
    closing = np.trace(dag(u0) @ u)
    if abs(closing) <= RANK_TOL * d:
        raise RankDeficient(abs(closing), float(d))
    return polar_phase(closing) * np.exp(1j * tr_int / d)


def evolve_unitary(hamiltonian, u0, steps: int = SCHRODINGER_STEPS, unitarity_tol: float = 1e-9, keep: bool = False):
    """Integrate ``i dU/ds = H U`` on ``[0, 1]``; optionally keep every grid value."""
    u = as_matrix(u0).copy()
    h = 1.0 / steps
    traj = [u.copy()] if keep else None
    for j in range(steps):
        hm = as_matrix(hamiltonian((j + 0.5) * h))
        u = expm_antihermitian(-1j * hm * h) @ u
        if (j + 1) % REUNITARIZE_EVERY == 0:
            u = polar_unitary(u).unitary
        if keep:
            traj.append(u.copy())
    err = np.linalg.norm(dag(u) @ u - np.eye(u.shape[0]))
    if not np.isfinite(err) or err > unitarity_tol:
        raise IntegratorFailure(f"unitarity lost: residual {err:.3e}")
    return u, traj


# -- path registry ---------------------------------------------------------


def constant_path(rep: KrausRep) -> ChannelPath:
    ops = np.array(rep.ops)
    return ChannelPath(lambda s: ops, lambda s: np.zeros_like(ops), name="constant")


def unitary_rotation_path(angle: float, axis: Sequence[float] = (0.0, 0.0, 1.0)) -> ChannelPath:
    """``U(s) = exp(-i s angle n.sigma / 2)`` as a ``K = 1`` path."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = -0.5j * angle * sum(c * p for c, p in zip(n, PAULIS))
    return ChannelPath(
        lambda s: expm(s * gen)[None],
        lambda s: (gen @ expm(s * gen))[None],
        name="unitary_rotation",
    )


def phase_gauge_path(rep: KrausRep, omega: float) -> ChannelPath:
    ops = np.array(rep.ops)
    return ChannelPath(
        lambda s: ops * np.exp(1j * omega * s),
        lambda s: 1j * omega * ops * np.exp(1j * omega * s),
        name="phase_gauge",
    )


def random_isometry_path(dim: int, k: int, seed: int = 0, scale: float = 1.0) -> ChannelPath:
    """Kraus operators read off the isometry ``exp(s M) V0`` on ``C^dim x C^k``.

    Trace preserving for every ``s``; the Kraus number is ``k`` for generic draws.
    """
    from .kraus import random_channel

    rng = np.random.default_rng(seed)
    v0_rep = random_channel(dim, k, rng)
    v0 = v0_rep.ops.transpose(1, 0, 2).reshape(dim * k, dim)
    m = scale * random_antihermitian(dim * k, rng) / np.sqrt(dim * k)

    def to_ops(v):
        return v.reshape(dim, k, dim).transpose(1, 0, 2)

    return ChannelPath(
        lambda s: to_ops(expm(s * m) @ v0),
        lambda s: to_ops(m @ expm(s * m) @ v0),
        name="random_isometry",
    )


def sampled_path(samples: Sequence[np.ndarray], grid: Optional[Sequence[float]] = None) -> ChannelPath:
    """Cubic-spline family through dense per-sample Kraus arrays."""
    arr = np.asarray(samples, dtype=complex)
    s = np.linspace(0.0, 1.0, arr.shape[0]) if grid is None else np.asarray(grid, dtype=float)
    spline = CubicSpline(s, arr, axis=0)
    return ChannelPath(lambda t: spline(t), lambda t: spline(t, 1), name="sampled")


PATHS = {
    "unitary_rotation": lambda angle, *axis: unitary_rotation_path(angle, axis or (0, 0, 1)),
    "random_isometry": lambda dim=2, k=2, seed=0, scale=1.0: random_isometry_path(int(dim), int(k), int(seed), scale),
}
