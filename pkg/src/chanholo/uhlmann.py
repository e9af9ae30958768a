"""Uhlmann amplitudes of Choi states and the channel/Uhlmann holonomy bridge."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .discrete import ChannelSequence, holonomy
from .errors import BadBasis, NotCyclic, NotMaximalKraus, RankDeficient
from .kraus import KrausRep, choi
from .matcore import RANK_TOL, dag, phi, polar_unitary

FAITHFUL_FLOOR = 1e-10


def maximally_entangled(dim: int, u=None) -> np.ndarray:
    """``(1 x U) sum_i |ii> / sqrt(D)``; ``U`` defaults to the identity."""
    psi = np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)
    if u is None:
        return psi
    return np.kron(np.eye(dim), np.asarray(u, dtype=complex)) @ psi


@dataclass(frozen=True)
class UhlmannAmplitude:
    """``W`` with ``W W^dag = rho`` on ``H_q x H_q``."""

    matrix: np.ndarray

    @property
    def rho(self) -> np.ndarray:
        return self.matrix @ dag(self.matrix)


def _check_basis(basis: np.ndarray, n: int, tol: float = 1e-10) -> np.ndarray:
    f = np.asarray(basis, dtype=complex)
    if f.shape != (n, n):
        raise BadBasis(f"basis must be {n} column vectors of length {n}, got shape {f.shape}")
    if np.linalg.norm(dag(f) @ f - np.eye(n)) > tol:
        raise BadBasis("basis vectors are not orthonormal")
    return f


def amplitude_from_rep(rep: KrausRep, basis=None, psi: Optional[np.ndarray] = None) -> UhlmannAmplitude:
    """``W = sum_k (E_k x 1)|psi><f_k|``.

    ``basis`` holds the vectors ``f_k`` as columns (standard basis if omitted).
    Only maximal Kraus number ``K = D^2`` is accepted.
    """
    d = rep.dim
    n = d * d
    if rep.k != n:
        raise NotMaximalKraus(f"K={rep.k} but the bridge needs K=D^2={n}")
    f = np.eye(n, dtype=complex) if basis is None else _check_basis(basis, n)
    psi = maximally_entangled(d) if psi is None else np.asarray(psi, dtype=complex)
    cols = np.stack([np.kron(op, np.eye(d)) @ psi for op in rep.ops], axis=1)
    return UhlmannAmplitude(cols @ dag(f))


class DensitySequence:
    """Faithful density operators, closed by repeating the first at the end."""

    def __init__(self, states: Sequence[np.ndarray], floor: float = FAITHFUL_FLOOR):
        states = [np.asarray(r, dtype=complex) for r in states]
        for i, r in enumerate(states):
            w = np.linalg.eigvalsh(0.5 * (r + dag(r)))
            if w[0] <= floor:
                raise ValueError(f"state {i} is not faithful (min eigenvalue {w[0]:.3e})")
        self.states = states

    def __len__(self):
        return len(self.states)


def uhlmann_holonomy(
    seq: DensitySequence, amplitudes: Sequence[UhlmannAmplitude], rank_tol: float = RANK_TOL, tol: float = 1e-10
) -> np.ndarray:
    """``Phi(W_1) U_{N+1} U_1^dag Phi(W_1^dag)`` for the cyclic amplitude chain.

    ``amplitudes`` lists ``W_1..W_N``; ``W_{N+1} = W_1`` is implied. Passing
    ``N+1`` amplitudes is allowed if the last equals the first.
    """
    amps = [np.asarray(a.matrix) for a in amplitudes]
    if len(amps) == len(seq) + 1:
        if np.linalg.norm(amps[-1] - amps[0]) > tol * max(1.0, np.linalg.norm(amps[0])):
            raise NotCyclic("W_{N+1} differs from W_1")
        amps = amps[:-1]
    if len(amps) != len(seq):
        raise ValueError(f"{len(amps)} amplitudes for {len(seq)} states")
    for i, (w, r) in enumerate(zip(amps, seq.states)):
        if np.linalg.norm(w @ dag(w) - r) > tol * max(1.0, np.linalg.norm(r)):
            raise ValueError(f"amplitude {i} does not purify its state")
    n = len(amps)
    u = np.eye(amps[0].shape[0], dtype=complex)
    for j in range(n):
        w_next = amps[(j + 1) % n]
        try:
            u = phi(dag(w_next) @ amps[j], rank_tol, 1.0) @ u
        except RankDeficient as exc:
            raise RankDeficient(exc.smin, exc.smax, link=j + 1) from None
    p1 = polar_unitary(amps[0], rank_tol).unitary
    return p1 @ u @ dag(p1)


def jamiolkowski_sequence(seq: ChannelSequence, psi: Optional[np.ndarray] = None) -> DensitySequence:
    reps = list(seq)
    if psi is None:
        return DensitySequence([choi(r).matrix for r in reps])
    states = []
    for r in reps:
        cols = np.stack([np.kron(op, np.eye(r.dim)) @ psi for op in r.ops], axis=1)
        states.append(cols @ dag(cols))
    return DensitySequence(states)


def channel_from_uhlmann(seq: ChannelSequence, basis=None, psi: Optional[np.ndarray] = None) -> np.ndarray:
    """``[U_ch]_kl = <f_k| Phi(W_1^dag) U_Uhl Phi(W_1) |f_l>``."""
    n = seq.dim ** 2
    f = np.eye(n, dtype=complex) if basis is None else _check_basis(basis, n)
    amps = [amplitude_from_rep(r, f, psi) for r in seq]
    u_uhl = uhlmann_holonomy(jamiolkowski_sequence(seq, psi), amps)
    w1 = amps[0].matrix
    return dag(f) @ phi(dag(w1)) @ u_uhl @ phi(w1) @ f


def channel_vs_uhlmann(seq: ChannelSequence, basis=None, psi: Optional[np.ndarray] = None) -> float:
    """Norm of the difference between the channel holonomy and its Uhlmann form."""
    return float(np.linalg.norm(holonomy(seq) - channel_from_uhlmann(seq, basis, psi)))


def random_orthonormal_basis(n: int, rng: np.random.Generator) -> np.ndarray:
    from .matcore import haar_unitary

    return haar_unitary(n, rng)
