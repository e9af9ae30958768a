"""Kraus representations of qubit and qudit channels.

A channel is carried around as one of its linearly independent Kraus
representations; the unitary reshuffles ``F_k -> sum_l F_l U_lk`` that
leave the channel fixed are the gauge freedom.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadArity, DimensionMismatch, ParamOutOfRange, UnknownName
from .matcore import dag, haar_unitary, rank_estimate

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SPLUS = SX + 1j * SY
PAULIS = (SX, SY, SZ)

ZERO_OP_NORM = 1e-12


class KrausRep:
    """Ordered list of ``K`` operators acting on a ``D``-dimensional space.

    ``ops`` is stored as a read-only ``(K, D, D)`` complex array.
    """

    __slots__ = ("ops",)

    def __init__(self, ops):
        arr = np.array(ops, dtype=complex)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[0] == 0:
            raise DimensionMismatch(f"need a nonempty list of square matrices, got shape {arr.shape}")
        if arr.shape[1] != arr.shape[2]:
            raise DimensionMismatch(f"Kraus operators must be square, got {arr.shape[1:]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Kraus operators contain non-finite entries")
        arr.setflags(write=False)
        self.ops = arr

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    @property
    def k(self) -> int:
        return self.ops.shape[0]

    def __len__(self):
        return self.k

    def __getitem__(self, i):
        return self.ops[i]

    def __iter__(self):
        return iter(self.ops)

    def __repr__(self):
        return f"KrausRep(dim={self.dim}, k={self.k})"

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return np.einsum("kab,bc,kdc->ad", self.ops, rho, self.ops.conj())

    def gram(self) -> np.ndarray:
        """``Q_kl = Tr(F_k^dag F_l)``."""
        flat = self.ops.reshape(self.k, -1)
        return flat.conj() @ flat.T

    def tp_residual(self) -> float:
        s = np.einsum("kba,kbc->ac", self.ops.conj(), self.ops)
        return float(np.linalg.norm(s - np.eye(self.dim)))

    def drop_zero_ops(self, tol: float = ZERO_OP_NORM) -> "KrausRep":
        keep = [op for op in self.ops if np.linalg.norm(op) >= tol]
        return KrausRep(keep if keep else self.ops[:1])


@dataclass(frozen=True)
class ValidationReport:
    trace_preserving: bool
    kraus_number_ok: bool
    gram: np.ndarray
    gram_rank: int
    tp_residual: float


def validate(rep: KrausRep, tol: float = 1e-10) -> ValidationReport:
    """Trace preservation and linear independence of ``rep``."""
    g = rep.gram()
    rank = rank_estimate(g, tol)
    res = rep.tp_residual()
    return ValidationReport(res <= tol, rank == rep.k, g, rank, res)


def check_unitary(u, tol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim == 0:
        u = u.reshape(1, 1)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"gauge unitary must be square, got {u.shape}")
    if np.linalg.norm(dag(u) @ u - np.eye(u.shape[0])) > tol:
        raise ValueError("gauge matrix is not unitary")
    return u


def gauge_transform(rep: KrausRep, u, tol: float = 1e-10) -> KrausRep:
    """``F_k -> sum_l F_l U_lk``."""
    u = check_unitary(u, tol)
    if u.shape[0] != rep.k:
        raise DimensionMismatch(f"gauge of size {u.shape[0]} for K={rep.k}")
    return KrausRep(np.einsum("lab,lk->kab", rep.ops, u))


@dataclass(frozen=True)
class ChoiMatrix:
    """Trace-one Choi state ``(E x I)(|psi><psi|)`` with ``|psi> = sum_i |ii>/sqrt(D)``.

    Row index ``a*D + i``: first factor is the channel output, second the
    reference copy.
    """

    dim: int
    matrix: np.ndarray = field(repr=False)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def rank(self, tol: float = 1e-10) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def distance(self, other: "ChoiMatrix") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix))


def choi(rep: KrausRep) -> ChoiMatrix:
    flat = rep.ops.reshape(rep.k, -1)
    m = flat.T @ flat.conj() / rep.dim
    return ChoiMatrix(rep.dim, 0.5 * (m + dag(m)))


def canonical_rep(c: ChoiMatrix, tol: float = 1e-10) -> KrausRep:
    """Linearly independent Kraus operators from the Choi eigenvectors.

    Operators are ordered by decreasing eigenvalue; each is phase-fixed so its
    largest-magnitude entry is real positive.
    """
    w, v = np.linalg.eigh(c.matrix)
    order = np.argsort(w)[::-1]
    ops = []
    for j in order:
        if w[j] <= tol:
            continue
        op = np.sqrt(w[j] * c.dim) * v[:, j].reshape(c.dim, c.dim)
        flat = op.reshape(-1)
        big = flat[np.argmax(np.abs(flat))]
        ops.append(op * (abs(big) / big))
    if not ops:
        raise ValueError("Choi matrix has no eigenvalue above tolerance")
    return KrausRep(ops)


def random_channel(dim: int, k: int, seed: int | np.random.Generator | None = None) -> KrausRep:
    """Random channel of Kraus number exactly ``k`` from a Haar isometry.

    The first ``dim`` columns of a Haar unitary on ``C^dim x C^k`` give the
    isometry ``V|x> = sum_k E_k|x> x |a_k>``.
    """
    if k < 1 or k > dim * dim:
        raise BadArity(f"Kraus number {k} not in [1, {dim * dim}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    while True:
        v = haar_unitary(dim * k, rng)[:, :dim]
        ops = v.reshape(dim, k, dim).transpose(1, 0, 2)
        rep = KrausRep(ops)
        if rank_estimate(rep.gram(), 1e-8) == k:
            return rep


def _prob(name: str, p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"{name}: probability {p} outside [0, 1]")
    return p


def phase_flip_ops(pe: float) -> list[np.ndarray]:
    return [np.sqrt(1 - pe) * I2, np.sqrt(pe) * SZ]


def bit_flip_ops(pf: float) -> list[np.ndarray]:
    return [np.sqrt(1 - pf) * I2, np.sqrt(pf) * SX]


def amplitude_damping_ops(pg: float) -> list[np.ndarray]:
    r = np.sqrt(1 - pg)
    return [0.5 * (1 + r) * I2 + 0.5 * (1 - r) * SZ, 0.5 * np.sqrt(pg) * SPLUS]


def depolarizing_ops(p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - 3 * p / 4) * I2] + [np.sqrt(p / 4) * s for s in PAULIS]


ZOO_NAMES = ("identity", "unitary", "phase_flip", "bit_flip", "amplitude_damping", "depolarizing")


def zoo(name: str, *params, dim: int = 2, drop_zero: bool = True) -> KrausRep:
    """Named qubit channels.

    ``unitary`` takes the matrix as its single parameter, ``identity`` honours
    ``dim``; the rest are qubit channels taking one probability. Operators with
    norm below 1e-12 are dropped unless ``drop_zero`` is false, so degenerate
    probabilities report their true Kraus number.
    """
    if name == "identity":
        ops = [np.eye(dim, dtype=complex)]
    elif name == "unitary":
        if len(params) != 1:
            raise BadArity("unitary takes one matrix parameter")
        ops = [check_unitary(params[0], 1e-9)]
    elif name in ("phase_flip", "bit_flip", "amplitude_damping", "depolarizing"):
        if len(params) != 1:
            raise BadArity(f"{name} takes one probability")
        p = _prob(name, params[0])
        ops = {
            "phase_flip": phase_flip_ops,
            "bit_flip": bit_flip_ops,
            "amplitude_damping": amplitude_damping_ops,
            "depolarizing": depolarizing_ops,
        }[name](p)
    else:
        raise UnknownName(name)
    rep = KrausRep(ops)
    return rep.drop_zero_ops() if drop_zero else rep


def same_channel(a: KrausRep, b: KrausRep, tol: float = 1e-10) -> bool:
    return a.dim == b.dim and choi(a).distance(choi(b)) <= tol


def rep_to_json(rep: KrausRep) -> dict:
    return {
        "dim": rep.dim,
        "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in op] for op in rep.ops],
    }


def rep_from_json(obj: dict) -> KrausRep:
    ops = np.array(obj["kraus"], dtype=float)
    if ops.ndim != 4 or ops.shape[-1] != 2:
        raise DimensionMismatch("kraus entries must be [re, im] pairs")
    rep = KrausRep(ops[..., 0] + 1j * ops[..., 1])
    if "dim" in obj and int(obj["dim"]) != rep.dim:
        raise DimensionMismatch(f"declared dim {obj['dim']} but operators are {rep.dim}x{rep.dim}")
    return rep


def sequence_from_json(obj: dict | Sequence) -> list[KrausRep]:
    items = obj["channels"] if isinstance(obj, dict) else obj
    return [rep_from_json(c) for c in items]
