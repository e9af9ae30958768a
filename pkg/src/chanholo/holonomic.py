"""Holonomic channels built from a moving orthogonal decomposition ``H = (+)_k H_k(s)``.

Each block carries an orthonormal frame ``F_k(s)`` (a ``D x D_k`` matrix with
columns ``|a_i(s)>``). The Kraus operators are
``Gamma_k(s) = F_k(s) M_k(s) F_k(0)^dag`` with ``M_k`` the path-ordered
exponential of ``[A_k]_ij = <da_i/ds | a_j>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import FrameDiscontinuity, VanishingTrace
from .matcore import dag, expm_antihermitian, polar_phase, polar_unitary, rank_estimate

FD_STEP = 1e-5


@dataclass
class Block:
    rank: int
    frame_at: Callable[[float], np.ndarray]
    deriv_at: Optional[Callable[[float], np.ndarray]] = None
    # points where the frame is only piecewise smooth; transport steps end on them
    breakpoints: Sequence[float] = ()

    def frame(self, s: float) -> np.ndarray:
        return np.asarray(self.frame_at(s), dtype=complex).reshape(-1, self.rank)

    def deriv(self, s: float, h: float = FD_STEP) -> np.ndarray:
        if self.deriv_at is not None:
            return np.asarray(self.deriv_at(s), dtype=complex).reshape(-1, self.rank)
        f = self.frame
        return (8 * (f(s + h) - f(s - h)) - (f(s + 2 * h) - f(s - 2 * h))) / (12 * h)

    def connection(self, s: float) -> np.ndarray:
        """``[A]_ij = <da_i|a_j>``."""
        a = dag(self.deriv(s)) @ self.frame(s)
        return 0.5 * (a - dag(a))

    def projector(self, s: float) -> np.ndarray:
        f = self.frame(s)
        return f @ dag(f)


class SubspaceFamily:
    def __init__(self, blocks: Sequence[Block], name: str = "family"):
        self.blocks = list(blocks)
        self.name = name
        self.dim = self.blocks[0].frame(0.0).shape[0]
        if sum(b.rank for b in self.blocks) != self.dim:
            raise ValueError("block ranks do not add up to the dimension")

    @property
    def k(self) -> int:
        return len(self.blocks)

    def check_frames(self, s: float, tol: float = 1e-8) -> float:
        """Deviation of the stacked frames at ``s`` from a unitary."""
        f = np.hstack([b.frame(s) for b in self.blocks])
        err = float(np.linalg.norm(dag(f) @ f - np.eye(self.dim)))
        if err > tol:
            raise ValueError(f"frames at s={s} are not orthonormal (residual {err:.2e})")
        return err

    def projectors(self, s: float) -> list[np.ndarray]:
        return [b.projector(s) for b in self.blocks]


@dataclass(frozen=True)
class WilsonLine:
    k: int
    matrix: np.ndarray
    overlap_factor: complex


def _transport(block: Block, s: float, steps: int, check_tol: float = 1e-6) -> np.ndarray:
    """``P exp(int_0^s A ds')`` by the midpoint rule, later factors on the left."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    grid = np.linspace(0.0, s, steps + 1)
    extra = [b for b in block.breakpoints if 0.0 < b < s]
    if extra:
        grid = np.unique(np.concatenate([grid, extra]))
    m = np.eye(block.rank, dtype=complex)
    prev = block.frame(0.0)
    for a, b in zip(grid[:-1], grid[1:]):
        nxt = block.frame(b)
        if rank_estimate(dag(nxt) @ prev, check_tol) < block.rank:
            raise FrameDiscontinuity(f"frame overlap drops rank between s={a} and s={b}")
        prev = nxt
        m = expm_antihermitian(block.connection(0.5 * (a + b)) * (b - a)) @ m
    return m


def wilson_lines(fam: SubspaceFamily, s: float = 1.0, steps: int = 2048) -> list[WilsonLine]:
    out = []
    for k, b in enumerate(fam.blocks):
        m = _transport(b, s, steps)
        tr = complex(np.trace(dag(b.frame(0.0)) @ b.frame(s) @ m))
        out.append(WilsonLine(k, m, tr))
    return out


def gamma_operators(fam: SubspaceFamily, s: float, steps: int = 2048) -> list[np.ndarray]:
    """``Gamma_k(s) = F_k(s) P exp(int_0^s A_k) F_k(0)^dag``."""
    return [
        b.frame(s) @ w.matrix @ dag(b.frame(0.0)) for b, w in zip(fam.blocks, wilson_lines(fam, s, steps))
    ]


def holonomic_channel(fam: SubspaceFamily, s: float, rho, steps: int = 2048) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return sum(g @ rho @ dag(g) for g in gamma_operators(fam, s, steps))


def trace_preservation_residual(fam: SubspaceFamily, s: float, steps: int = 2048) -> float:
    gs = gamma_operators(fam, s, steps)
    return float(np.linalg.norm(sum(dag(g) @ g for g in gs) - np.eye(fam.dim)))


def parallel_transport_residual(fam: SubspaceFamily, grid: Sequence[float], steps: int = 2048, h: float = 1e-4) -> float:
    """``max |Tr(dGamma_k^dag Gamma_l)|`` over the grid, central differences in ``s``.

    ``Gamma(s +- h)`` are obtained by one extra midpoint step from ``Gamma(s)``
    so the difference quotient sees only the local ``O(h^2)`` error.
    """
    worst = 0.0
    for s in grid:
        gam, plus, minus = [], [], []
        for b, w in zip(fam.blocks, wilson_lines(fam, s, steps)):
            f0 = dag(b.frame(0.0))
            m = w.matrix
            mp = expm_antihermitian(b.connection(s + 0.5 * h) * h) @ m
            mm = expm_antihermitian(-b.connection(s - 0.5 * h) * h) @ m
            gam.append(b.frame(s) @ m @ f0)
            plus.append(b.frame(s + h) @ mp @ f0)
            minus.append(b.frame(s - h) @ mm @ f0)
        for k in range(fam.k):
            dg = (plus[k] - minus[k]) / (2 * h)
            for l in range(fam.k):
                worst = max(worst, abs(np.trace(dag(dg) @ gam[l])))
    return worst


def holonomic_channel_holonomy(fam: SubspaceFamily, steps: int = 2048, tol: float = 1e-10) -> np.ndarray:
    """``diag(Phi(Tr U_g(C_1)), ..., Phi(Tr U_g(C_K)))``."""
    lines = wilson_lines(fam, 1.0, steps)
    diag = []
    for w in lines:
        if abs(w.overlap_factor) <= tol:
            raise VanishingTrace(w.k, w.overlap_factor)
        diag.append(polar_phase(w.overlap_factor))
    return np.diag(diag)


def endpoint_overlap_matrix(fam: SubspaceFamily, steps: int = 2048) -> np.ndarray:
    """``[T_01]_kl = Tr(P_k(0) Gamma_l(1))``, diagonal for a genuine decomposition."""
    p0 = fam.projectors(0.0)
    g1 = gamma_operators(fam, 1.0, steps)
    return np.array([[np.trace(p @ g) for g in g1] for p in p0])


def pinch(projs: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(p @ rho @ p for p in projs)


@dataclass(frozen=True)
class MeasurementApproximation:
    output: np.ndarray
    same_index: np.ndarray
    remainder: np.ndarray

    @property
    def remainder_mass(self) -> float:
        return float(np.trace(self.remainder).real)


def measurement_sequence(fam: SubspaceFamily, s: float, n: int, rho) -> MeasurementApproximation:
    """Non-selective projective measurements at ``s_j = j s / n``, ``j = 0..n``.

    The full map is the composition of the ``n + 1`` pinchings (equal to the
    sum over all outcome strings); the same-index term keeps only strings with
    constant block label, and the remainder is their difference.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rho = np.asarray(rho, dtype=complex)
    grid = [j * s / n for j in range(n + 1)]
    out = rho
    chains = [np.eye(fam.dim, dtype=complex) for _ in fam.blocks]
    for t in grid:
        projs = fam.projectors(t)
        out = pinch(projs, out)
        chains = [p @ c for p, c in zip(projs, chains)]
    same = sum(c @ rho @ dag(c) for c in chains)
    return MeasurementApproximation(out, same, out - same)


def measurement_approximation(fam: SubspaceFamily, s: float, n: int, rho) -> np.ndarray:
    return measurement_sequence(fam, s, n, rho).output


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    w = np.linalg.eigvalsh(0.5 * ((a - b) + dag(a - b)))
    return 0.5 * float(np.sum(np.abs(w)))


# -- named families ---------------------------------------------------------


def rotating_plane(angle: float = np.pi / 3) -> SubspaceFamily:
    """Two 1-d blocks of ``C^2`` rotated by ``angle * s``."""

    def f1(s):
        return np.array([[np.cos(angle * s)], [np.sin(angle * s)]], dtype=complex)

    def f2(s):
        return np.array([[-np.sin(angle * s)], [np.cos(angle * s)]], dtype=complex)

    return SubspaceFamily(
        [
            Block(1, f1, lambda s: angle * f2(s)),
            Block(1, f2, lambda s: -angle * f1(s)),
        ],
        name="rotating_plane",
    )


def spinor(n: np.ndarray) -> np.ndarray:
    """Spin-up state along the unit vector ``n`` (gauge singular at the south pole)."""
    x, y, z = n
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    ph = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * ph) * np.sin(theta / 2)], dtype=complex)


def spinor_down(n: np.ndarray) -> np.ndarray:
    x, y, z = n
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    ph = np.arctan2(y, x)
    return np.array([-np.exp(-1j * ph) * np.sin(theta / 2), np.cos(theta / 2)], dtype=complex)


def bloch_family(
    direction: Callable[[float], np.ndarray], name: str = "bloch", breakpoints: Sequence[float] = ()
) -> SubspaceFamily:
    return SubspaceFamily(
        [
            Block(1, lambda s: spinor(direction(s)).reshape(2, 1), breakpoints=breakpoints),
            Block(1, lambda s: spinor_down(direction(s)).reshape(2, 1), breakpoints=breakpoints),
        ],
        name=name,
    )


def bloch_circle(theta: float = np.pi / 3) -> SubspaceFamily:
    """Spin-up/down blocks along a circle of latitude at polar angle ``theta``."""

    def up(s):
        return np.array([[np.cos(theta / 2)], [np.exp(2j * np.pi * s) * np.sin(theta / 2)]])

    def dup(s):
        return np.array([[0.0], [2j * np.pi * np.exp(2j * np.pi * s) * np.sin(theta / 2)]])

    def down(s):
        return np.array([[-np.exp(-2j * np.pi * s) * np.sin(theta / 2)], [np.cos(theta / 2)]])

    def ddown(s):
        return np.array([[2j * np.pi * np.exp(-2j * np.pi * s) * np.sin(theta / 2)], [0.0]])

    return SubspaceFamily([Block(1, up, dup), Block(1, down, ddown)], name="bloch_circle")


def slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    om = np.arccos(np.clip(a @ b, -1.0, 1.0))
    return (np.sin((1 - t) * om) * a + np.sin(t * om) * b) / np.sin(om)


def geodesic_triangle(vertices: Sequence[Sequence[float]]) -> SubspaceFamily:
    """Closed circuit along the great-circle edges of a spherical triangle."""
    vs = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in vertices]

    def direction(s):
        s = s % 1.0
        seg = min(int(3 * s), 2)
        return slerp(vs[seg], vs[(seg + 1) % 3], 3 * s - seg)

    return bloch_family(direction, name="geodesic_triangle", breakpoints=(1 / 3, 2 / 3))


def frames_from_projectors(proj_at: Callable[[float], Sequence[np.ndarray]], grid: Sequence[float]) -> SubspaceFamily:
    """Smooth frames for a projector family by aligned continuation.

    At the first grid point each block frame is taken from the projector's
    eigenvectors; afterwards ``F_{j+1}`` is the polar (unitary-column) part of
    ``P(s_{j+1}) F_j``, which keeps consecutive frames maximally aligned. The
    sampled frames are spline-interpolated and re-orthonormalised on evaluation.
    """
    grid = np.asarray(grid, dtype=float)
    first = proj_at(grid[0])
    frames = []
    for p in first:
        w, v = np.linalg.eigh(0.5 * (p + dag(p)))
        frames.append([v[:, w > 0.5]])
    for t in grid[1:]:
        for k, p in enumerate(proj_at(t)):
            x = p @ frames[k][-1]
            u, _, vh = np.linalg.svd(x, full_matrices=False)
            frames[k].append(u @ vh)
    blocks = []
    for fk in frames:
        spline = CubicSpline(grid, np.array(fk), axis=0)

        def frame_at(s, spline=spline):
            u, _, vh = np.linalg.svd(spline(s), full_matrices=False)
            return u @ vh

        blocks.append(Block(fk[0].shape[1], frame_at))
    return SubspaceFamily(blocks, name="from_projectors")


FAMILIES = {
    "rotating_plane": lambda angle=np.pi / 3: rotating_plane(angle),
    "bloch_circle": lambda theta=np.pi / 3: bloch_circle(theta),
}
