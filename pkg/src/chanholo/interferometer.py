"""Two-path interferometer with a shared ancilla.

Stinespring dilations of the channels, the detection probability of a
Mach-Zehnder setup with Hadamard beam splitters, the operational parallel
transport by probability maximisation, and the final-step gluing whose
matrix in parallel end-point representations is the channel holonomy.

Tensor ordering is path x system x ancilla; the ancilla starts in ``|a_0>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .discrete import ChannelSequence, overlap
from .errors import CompletionFailure, DimensionMismatch, NotPositive, RankDeficient
from .kraus import KrausRep, gauge_transform
from .matcore import (
    RANK_TOL,
    dag,
    expm_antihermitian,
    haar_unitary,
    partial_trace,
    phi,
    random_antihermitian,
    solve_gauge_equation,
)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class Dilation:
    dim_q: int
    dim_a: int
    unitary: np.ndarray = field(repr=False)

    @property
    def ancilla(self) -> np.ndarray:
        a = np.zeros(self.dim_a, dtype=complex)
        a[0] = 1.0
        return a

    def kraus(self) -> KrausRep:
        """``E_k = <a_k| U |a>``."""
        u = self.unitary.reshape(self.dim_q, self.dim_a, self.dim_q, self.dim_a)
        return KrausRep(u[:, :, :, 0].transpose(1, 0, 2))

    def with_ancilla_unitary(self, v: np.ndarray) -> "Dilation":
        """``(1 x V) U``: same channel, regauged Kraus operators."""
        return Dilation(self.dim_q, self.dim_a, np.kron(np.eye(self.dim_q), v) @ self.unitary)

    def apply(self, rho) -> np.ndarray:
        a = self.ancilla
        big = np.kron(np.asarray(rho, dtype=complex), np.outer(a, a.conj()))
        return partial_trace(self.unitary @ big @ dag(self.unitary), [self.dim_q, self.dim_a], [0])


def _complete_columns(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal complement of the columns of ``v`` by Gram-Schmidt over the standard basis."""
    n, m = v.shape
    cols = [v[:, j] for j in range(m)]
    extra = []
    for i in range(n):
        if len(extra) == n - m:
            break
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        for _ in range(2):
            for c in cols + extra:
                e = e - c * (c.conj() @ e)
        nrm = np.linalg.norm(e)
        if nrm > tol:
            extra.append(e / nrm)
    if len(extra) != n - m:
        raise CompletionFailure(f"found {len(extra)} of {n - m} complement vectors")
    return np.stack(extra, axis=1) if extra else np.zeros((n, 0), dtype=complex)


def dilate(rep: KrausRep, tol: float = 1e-9) -> Dilation:
    """Unitary on ``H_q x H_a`` (``dim H_a = K``) with ``<a_k|U|a_0> = E_k``."""
    d, k = rep.dim, rep.k
    iso = rep.ops.transpose(1, 0, 2).reshape(d * k, d)
    if np.linalg.norm(dag(iso) @ iso - np.eye(d)) > tol:
        raise CompletionFailure("Kraus operators do not form an isometry (not trace preserving)")
    rest = _complete_columns(iso)
    u = np.zeros((d * k, d * k), dtype=complex)
    in_cols = [x * k for x in range(d)]
    other = [c for c in range(d * k) if c % k != 0]
    u[:, in_cols] = iso
    u[:, other] = rest
    return Dilation(d, k, u)


def ancilla_cross_operator(dil0: Dilation, dil1: Dilation, rho_q=None) -> np.ndarray:
    """``Tr_q[V0 (rho x |a><a|) V1^dag]``; ``rho`` defaults to ``1/D``."""
    if (dil0.dim_q, dil0.dim_a) != (dil1.dim_q, dil1.dim_a):
        raise DimensionMismatch("dilations act on different spaces")
    d, k = dil0.dim_q, dil0.dim_a
    rho = np.eye(d) / d if rho_q is None else np.asarray(rho_q, dtype=complex)
    a = dil0.ancilla
    big = np.kron(rho, np.outer(a, a.conj()))
    return partial_trace(dil0.unitary @ big @ dag(dil1.unitary), [d, k], [1])


def detection_probability_closed(dil0, dil1, v0, v1, rho_q) -> float:
    m = ancilla_cross_operator(dil0, dil1, rho_q)
    return float(0.5 + 0.5 * np.trace(v0 @ m @ dag(v1)).real)


def detection_probability_circuit(dil0, dil1, v0, v1, rho_q) -> float:
    """Full path x system x ancilla simulation: H, U_tot, F, H, project on path 0."""
    d, k = dil0.dim_q, dil0.dim_a
    eq, ea = np.eye(d), np.eye(k)
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    u_tot = np.kron(p0, dil0.unitary) + np.kron(p1, dil1.unitary)
    f = np.kron(p0, np.kron(eq, v0)) + np.kron(p1, np.kron(eq, v1))
    bs = np.kron(HADAMARD, np.eye(d * k))
    a = dil0.ancilla
    state = np.kron(p0, np.kron(np.asarray(rho_q, dtype=complex), np.outer(a, a.conj())))
    circ = bs @ f @ u_tot @ bs
    out = circ @ state @ dag(circ)
    proj = np.kron(p0, np.eye(d * k))
    return float(np.trace(proj @ out).real)


def detection_probability(dil0, dil1, v0, v1, rho_q=None, check: bool = True, tol: float = 1e-10) -> float:
    """``p = 1/2 + 1/2 Re Tr{V0 Tr_q[V^(0)(rho x |a><a|)V^(1)dag] V1^dag}``.

    With ``check`` the closed form is compared against the explicit circuit.
    """
    rho = np.eye(dil0.dim_q) / dil0.dim_q if rho_q is None else rho_q
    p = detection_probability_closed(dil0, dil1, v0, v1, rho)
    if check:
        pc = detection_probability_circuit(dil0, dil1, v0, v1, rho)
        if abs(p - pc) > tol:
            raise RuntimeError(f"closed form {p} and circuit {pc} disagree")
    return p


def optimal_ancilla_unitary(dil0: Dilation, dil1: Dilation, v0, rank_tol: float = RANK_TOL) -> np.ndarray:
    """``V1 = V0 Phi(M)`` maximising the detection probability for ``rho = 1/D``."""
    m = ancilla_cross_operator(dil0, dil1)
    return np.asarray(v0) @ phi(m, rank_tol, 1.0)


def random_search_ancilla_unitary(
    dil0: Dilation, dil1: Dilation, v0, iters: int = 4000, seed: int = 0
) -> tuple[np.ndarray, float]:
    """Derivative-free maximisation of ``p`` over ``V1`` by shrinking random moves."""
    rng = np.random.default_rng(seed)
    k = dil0.dim_a
    best = np.eye(k, dtype=complex)
    pbest = detection_probability(dil0, dil1, v0, best, check=False)
    step = 1.0
    for _ in range(iters):
        trial = best @ expm_antihermitian(step * random_antihermitian(k, rng))
        p = detection_probability(dil0, dil1, v0, trial, check=False)
        if p > pbest:
            best, pbest = trial, p
        else:
            step = max(step * 0.995, 1e-6)
    return best, pbest


@dataclass
class TransportRecord:
    link: int
    singular_values: list[float]
    probability: float


@dataclass
class TransportRun:
    unitaries: list[np.ndarray]
    dilations: list[Dilation]
    records: list[TransportRecord]

    def transported(self) -> list[Dilation]:
        return [d.with_ancilla_unitary(u) for d, u in zip(self.dilations, self.unitaries)]

    def kraus_reps(self) -> list[KrausRep]:
        return [d.kraus() for d in self.transported()]


def operational_parallel_transport(seq: ChannelSequence, mode: str = "closed", rank_tol: float = RANK_TOL) -> TransportRun:
    """Iterated probability maximisation ``U_{n+1} = U_n Phi(M_n)``, ``U_1 = 1``."""
    dils = [dilate(r) for r in seq]
    us = [np.eye(seq.k, dtype=complex)]
    records = []
    for n in range(len(dils) - 1):
        m = ancilla_cross_operator(dils[n], dils[n + 1])
        sv = np.linalg.svd(m, compute_uv=False)
        if mode == "closed":
            try:
                nxt = optimal_ancilla_unitary(dils[n], dils[n + 1], us[-1], rank_tol)
            except RankDeficient as exc:
                raise RankDeficient(exc.smin, exc.smax, link=n + 1) from None
        elif mode == "search":
            nxt, _ = random_search_ancilla_unitary(dils[n], dils[n + 1], us[-1], seed=n)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        p = detection_probability(dils[n], dils[n + 1], us[-1], nxt)
        records.append(TransportRecord(n + 1, sv.tolist(), p))
        us.append(nxt)
    return TransportRun(us, dils, records)


def transported_cross_operators(run: TransportRun) -> list[np.ndarray]:
    """``Tr_q[U~_n (1 x |a><a|) U~_{n+1}^dag]``, positive definite after transport."""
    t = run.transported()
    return [ancilla_cross_operator(t[n], t[n + 1]) * t[n].dim_q for n in range(len(t) - 1)]


@dataclass(frozen=True)
class Gluing:
    """Channel on path x system with arm channels ``rep0`` (path 0), ``rep1`` (path 1)."""

    rep0: KrausRep
    rep1: KrausRep
    c: np.ndarray

    def apply(self, sigma) -> np.ndarray:
        d = self.rep0.dim
        s = np.asarray(sigma, dtype=complex).reshape(2, d, 2, d)
        b00, b01, b10, b11 = s[0, :, 0], s[0, :, 1], s[1, :, 0], s[1, :, 1]
        out = np.zeros((2, d, 2, d), dtype=complex)
        out[0, :, 0] = self.rep0.apply(b00)
        out[1, :, 1] = self.rep1.apply(b11)
        v, w = self.rep0.ops, self.rep1.ops
        out[0, :, 1] = np.einsum("nm,nab,bc,mdc->ad", self.c, v, b01, w.conj())
        out[1, :, 0] = np.einsum("nm,mab,bc,ndc->ad", self.c.conj(), w, b10, v.conj())
        return out.reshape(2 * d, 2 * d)

    def contraction_excess(self) -> float:
        """Largest eigenvalue of ``C C^dag - 1`` (nonpositive for a valid gluing)."""
        return float(np.linalg.eigvalsh(self.c @ dag(self.c) - np.eye(self.c.shape[0]))[-1])


def interferometer_channel(dil0: Dilation, dil1: Dilation, v0, v1) -> Callable[[np.ndarray], np.ndarray]:
    """``sigma -> Tr_a[F U_tot (sigma x |a><a|) U_tot^dag F^dag]``."""
    d, k = dil0.dim_q, dil0.dim_a
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    u_tot = np.kron(p0, dil0.unitary) + np.kron(p1, dil1.unitary)
    f = np.kron(p0, np.kron(np.eye(d), v0)) + np.kron(p1, np.kron(np.eye(d), v1))
    g = f @ u_tot
    a = dil0.ancilla
    aa = np.outer(a, a.conj())

    def channel(sigma):
        big = np.kron(np.asarray(sigma, dtype=complex), aa)
        return partial_trace(g @ big @ dag(g), [2 * d, k], [0])

    return channel


def cross_block_superoperator(channel, d: int) -> np.ndarray:
    """Matrix of ``X -> <0|Lambda(|0><1| x X)|1>`` acting on row-major ``vec(X)``."""
    cols = []
    for i in range(d * d):
        x = np.zeros(d * d, dtype=complex)
        x[i] = 1.0
        sigma = np.kron(np.array([[0, 1], [0, 0]], dtype=complex), x.reshape(d, d))
        out = channel(sigma).reshape(2, d, 2, d)[0, :, 1]
        cols.append(out.reshape(-1))
    return np.stack(cols, axis=1)


def fit_gluing_matrix(superop: np.ndarray, rep0: KrausRep, rep1: KrausRep) -> tuple[np.ndarray, float]:
    """Least-squares ``C`` with ``superop = sum C_nm V_n (.) W_m^dag``; returns (C, residual)."""
    basis = np.stack(
        [np.kron(v, w.conj()).reshape(-1) for v in rep0.ops for w in rep1.ops], axis=1
    )
    coef, *_ = np.linalg.lstsq(basis, superop.reshape(-1), rcond=None)
    c = coef.reshape(rep0.k, rep1.k)
    return c, float(np.linalg.norm(basis @ coef - superop.reshape(-1)))


@dataclass
class FinalGluing:
    gluing: Gluing
    channel: Callable[[np.ndarray], np.ndarray]
    fit_residual: float
    run: TransportRun


def final_gluing(seq: ChannelSequence, rank_tol: float = RANK_TOL) -> FinalGluing:
    """Close the interferometric transport and read off the gluing matrix.

    Path 0 carries ``(1 x U_N) U_N``, path 1 carries ``(1 x U_1) U_1``. The
    cross block is expanded in the end-point representation of ``E_N`` made
    parallel to ``E_1`` and in ``E_1`` itself; the coefficient matrix is ``C``.
    """
    run = operational_parallel_transport(seq, rank_tol=rank_tol)
    dn, d1 = run.dilations[-1], run.dilations[0]
    chan = interferometer_channel(dn, d1, run.unitaries[-1], run.unitaries[0])
    e1 = d1.kraus()
    en = dn.kraus()
    t1n = overlap(e1, en)
    en_bar = gauge_transform(en, dag(phi(t1n, rank_tol, seq.dim)))
    c, res = fit_gluing_matrix(cross_block_superoperator(chan, seq.dim), en_bar, e1)
    return FinalGluing(Gluing(en_bar, e1, c), chan, res, run)


# -- smooth ancillary transport ---------------------------------------------


def ancilla_qr(u: np.ndarray, udot: np.ndarray, d: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``Q = Tr_q[U (1 x |a><a|) U^dag]`` and ``R = Tr_q[U (1 x |a><a|) dU^dag]``."""
    a = np.zeros(k)
    a[0] = 1.0
    proj = np.kron(np.eye(d), np.outer(a, a))
    q = partial_trace(u @ proj @ dag(u), [d, k], [1])
    r = partial_trace(u @ proj @ dag(udot), [d, k], [1])
    return q, r


def ancilla_gauge_potential(u, udot, d: int, k: int, s: Optional[float] = None) -> np.ndarray:
    q, r = ancilla_qr(u, udot, d, k)
    try:
        return solve_gauge_equation(q, r - dag(r))
    except NotPositive as exc:
        raise NotPositive(exc.min_eig, where=s) from None


def smooth_ancilla_transport(
    ufam: Callable[[float], np.ndarray],
    grid: Sequence[float],
    d: int,
    k: int,
    udot: Optional[Callable[[float], np.ndarray]] = None,
    h: float = 1e-5,
) -> list[np.ndarray]:
    """Ancilla unitaries ``U(s)`` on ``grid`` solving ``dU/ds = U A`` with ``U(grid[0]) = 1``."""
    if udot is None:
        udot = lambda s: (8 * (ufam(s + h) - ufam(s - h)) - (ufam(s + 2 * h) - ufam(s - 2 * h))) / (12 * h)
    grid = np.asarray(grid, dtype=float)
    us = [np.eye(k, dtype=complex)]
    for a, b in zip(grid[:-1], grid[1:]):
        sm = 0.5 * (a + b)
        gen = ancilla_gauge_potential(ufam(sm), udot(sm), d, k, sm)
        us.append(us[-1] @ expm_antihermitian(gen * (b - a)))
    return us


def ancilla_parallelity_residual(ufam, us: Sequence[np.ndarray], grid: Sequence[float], d: int, k: int) -> float:
    """Largest ``||M - M^dag|| / ds`` of consecutive transported cross operators."""
    worst = 0.0
    for j in range(len(grid) - 1):
        a = np.kron(np.eye(d), us[j]) @ ufam(grid[j])
        b = np.kron(np.eye(d), us[j + 1]) @ ufam(grid[j + 1])
        # second slot of ancilla_qr with b in place of a derivative is the cross operator
        _, m = ancilla_qr(a, b, d, k)
        worst = max(worst, float(np.linalg.norm(m - dag(m))) / (grid[j + 1] - grid[j]))
    return worst


def isometry_unitary_family(dim: int, k: int, seed: int = 0, scale: float = 1.0):
    """``s -> exp(s M) U0`` on ``C^dim x C^k`` with ``U0`` a dilation of a random channel."""
    from .kraus import random_channel

    rng = np.random.default_rng(seed)
    u0 = dilate(random_channel(dim, k, rng)).unitary
    m = scale * random_antihermitian(dim * k, rng) / np.sqrt(dim * k)
    w, v = np.linalg.eigh(1j * m)

    def ufam(s):
        return (v * np.exp(-1j * w * s)) @ dag(v) @ u0

    def udot(s):
        return m @ ufam(s)

    return ufam, udot


def random_unitary(n: int, seed: int = 0) -> np.ndarray:
    return haar_unitary(n, np.random.default_rng(seed))
