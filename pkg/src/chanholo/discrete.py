"""Overlap matrices, parallelity and the holonomy of finite channel sequences."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, RankDeficient
from .kraus import KrausRep, gauge_transform
from .matcore import RANK_TOL, dag, is_positive_definite, polar_unitary


class ChannelSequence:
    """Ordered Kraus representations sharing dimension and Kraus number."""

    def __init__(self, reps: Iterable[KrausRep]):
        reps = tuple(reps)
        if not reps:
            raise ValueError("empty channel sequence")
        d, k = reps[0].dim, reps[0].k
        for i, r in enumerate(reps):
            if r.dim != d or r.k != k:
                raise DimensionMismatch(f"channel {i} has (D, K)=({r.dim}, {r.k}), expected ({d}, {k})")
        self.reps = reps

    @property
    def dim(self) -> int:
        return self.reps[0].dim

    @property
    def k(self) -> int:
        return self.reps[0].k

    def __len__(self):
        return len(self.reps)

    def __getitem__(self, i):
        return self.reps[i]

    def __iter__(self):
        return iter(self.reps)

    def regauged(self, gauges: Sequence[np.ndarray]) -> "ChannelSequence":
        if len(gauges) != len(self.reps):
            raise DimensionMismatch(f"{len(gauges)} gauges for {len(self.reps)} channels")
        return ChannelSequence(gauge_transform(r, v) for r, v in zip(self.reps, gauges))


def overlap(later: KrausRep, earlier: KrausRep) -> np.ndarray:
    """``T_kl = Tr(later_k^dag earlier_l)``."""
    if later.dim != earlier.dim or later.k != earlier.k:
        raise DimensionMismatch(
            f"overlap of (D, K)=({later.dim}, {later.k}) with ({earlier.dim}, {earlier.k})"
        )
    a = later.ops.reshape(later.k, -1)
    b = earlier.ops.reshape(earlier.k, -1)
    return a.conj() @ b.T


def are_parallel(a: KrausRep, b: KrausRep, tol: float = 1e-10) -> bool:
    """True when ``overlap(b, a)`` is positive definite."""
    if a.dim != b.dim or a.k != b.k:
        return False
    return is_positive_definite(overlap(b, a), tol)


def link_overlaps(seq: ChannelSequence) -> list[np.ndarray]:
    """``[T_21, T_32, ..., T_N,N-1, T_1N]`` with the closing link last."""
    n = len(seq)
    out = [overlap(seq[j + 1], seq[j]) for j in range(n - 1)]
    out.append(overlap(seq[0], seq[n - 1]))
    return out


def _phi_link(t: np.ndarray, link: int, rank_tol: float, scale: float = 0.0) -> np.ndarray:
    try:
        return polar_unitary(t, rank_tol, scale).unitary
    except RankDeficient as exc:
        raise RankDeficient(exc.smin, exc.smax, link=link, singular_values=exc.singular_values) from None


def holonomy(seq: ChannelSequence, rank_tol: float = RANK_TOL) -> np.ndarray:
    """``Phi(T_1N) Phi(T_N,N-1) ... Phi(T_21)``.

    Links are numbered ``1..N-1`` for ``T_{n+1,n}`` and ``N`` for the closing
    overlap ``T_{1,N}``; a rank failure reports the link number.
    """
    u = np.eye(seq.k, dtype=complex)
    for j, t in enumerate(link_overlaps(seq), start=1):
        u = _phi_link(t, j, rank_tol, seq.dim) @ u
    return u


def parallel_gauge(seq: ChannelSequence, rank_tol: float = RANK_TOL) -> tuple[ChannelSequence, list[np.ndarray]]:
    """Regauge so every consecutive overlap is positive definite.

    Returns the new sequence and the unitaries ``U_1 = I``,
    ``U_{n+1} = Phi(T_{n+1,n}) U_n`` applied as ``E_k -> sum_l E_l U_lk``.
    """
    gauges = [np.eye(seq.k, dtype=complex)]
    for j in range(len(seq) - 1):
        t = overlap(seq[j + 1], seq[j])
        gauges.append(_phi_link(t, j + 1, rank_tol, seq.dim) @ gauges[-1])
    return seq.regauged(gauges), gauges


def parallel_gauge_holonomy(seq: ChannelSequence, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Holonomy as ``Phi`` of the closing overlap in the parallel-transport gauge."""
    pseq, _ = parallel_gauge(seq, rank_tol)
    return _phi_link(overlap(pseq[0], pseq[len(pseq) - 1]), len(seq), rank_tol, seq.dim)


def gauge_covariance_check(seq: ChannelSequence, gauges: Sequence[np.ndarray]) -> float:
    """``|| U_ch(regauged) - V_1^dag U_ch V_1 ||``."""
    v1 = np.asarray(gauges[0], dtype=complex).reshape(seq.k, seq.k)
    before = holonomy(seq)
    after = holonomy(seq.regauged(gauges))
    return float(np.linalg.norm(after - dag(v1) @ before @ v1))


def unitary_sequence_holonomy(unitaries: Sequence[np.ndarray]) -> complex:
    """Scalar holonomy of a sequence of unitary channels."""
    seq = ChannelSequence(KrausRep([u]) for u in unitaries)
    return complex(holonomy(seq)[0, 0])
