"""Phase-covariant multimeters with an N-copy program ``|ψ+(φ)>^{⊗N}``.

The data qubit is subsystem 0 and the N program qubits follow, so all
operators live on ``2**(N+1)`` dimensions. ``R±`` carry the 1/2 prior
(trace 1/2) as everywhere in :mod:`qmeter.engine`.

The relevant operators are block diagonal. Block ``k`` (1 <= k <= N) is
spanned by ``|0>_d|N,k>_p`` and ``|1>_d|N,k-1>_p``; blocks 0 and N+1 are
the one-dimensional spaces ``|0>_d|N,0>_p`` and ``|1>_d|N,N>_p``. The
orthogonal complement ``1_d ⊗ (1 - P_sym)`` is never populated by a
symmetric program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Povm, basis_ket, effective_data_povm, projector, symmetric_basis_state, tensor
from .engine import INCONCLUSIVE, MINUS, PLUS

TIE_TOL = 1e-12


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"program size must be a positive integer, got {n!r}")


def layout(n: int) -> tuple[int, ...]:
    return (2,) * (n + 1)


def pc_basis_kets(phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Equatorial basis ``(|0> ± e^{iφ}|1>)/√2``."""
    e = np.exp(1j * phi)
    s = 1 / math.sqrt(2)
    return np.array([s, s * e]), np.array([s, -s * e])


def program_ket(n: int, phi: float) -> np.ndarray:
    plus, _ = pc_basis_kets(phi)
    return tensor(*([plus] * n))


# ----------------------------------------------------------------- block structure


@dataclass(frozen=True)
class PcBlock:
    """One invariant subspace of the phase-covariant operators.

    ``basis`` holds the block's orthonormal kets as columns; ``r_plus`` and
    ``r_minus`` are the block-local operators, already weighted, so that
    ``sum_k V_k R_k V_k^†`` rebuilds the full ``R±``.
    """

    k: int
    basis: np.ndarray
    weight: float
    b_nk: float
    r_plus: np.ndarray
    r_minus: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def embed(self, local: np.ndarray) -> np.ndarray:
        return self.basis @ local @ self.basis.conj().T


@dataclass(frozen=True)
class BlockDecomposition:
    n: int
    blocks: tuple[PcBlock, ...]

    def assemble(self, which: str) -> np.ndarray:
        attr = "r_plus" if which == PLUS else "r_minus"
        return sum(b.embed(getattr(b, attr)) for b in self.blocks)

    def support_projector(self) -> np.ndarray:
        return sum(b.basis @ b.basis.conj().T for b in self.blocks)


def _block_kets(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The pair ``|0>_d|N,k>_p``, ``|1>_d|N,k-1>_p`` spanning block k."""
    e0, e1 = basis_ket(2, 0), basis_ket(2, 1)
    return tensor(e0, symmetric_basis_state(n, k)), tensor(e1, symmetric_basis_state(n, k - 1))


def _edge_ket(n: int, k: int) -> np.ndarray:
    if k == 0:
        return tensor(basis_ket(2, 0), symmetric_basis_state(n, 0))
    return tensor(basis_ket(2, 1), symmetric_basis_state(n, n))


def block_decomposition(n: int) -> BlockDecomposition:
    _check_n(n)
    norm = 2 ** (n + 1)
    blocks = []
    for k in range(n + 2):
        weight = math.comb(n + 1, k) / norm
        b = k / (n + 1)
        if k in (0, n + 1):
            basis = _edge_ket(n, k)[:, None]
            local = np.array([[0.5 * weight]], dtype=complex)
            blocks.append(PcBlock(k, basis, weight, b, local, local.copy()))
            continue
        u0, u1 = _block_kets(n, k)
        phi_p = np.array([math.sqrt(1 - b), math.sqrt(b)], dtype=complex)
        phi_m = np.array([math.sqrt(1 - b), -math.sqrt(b)], dtype=complex)
        blocks.append(
            PcBlock(
                k,
                np.column_stack([u0, u1]),
                weight,
                b,
                0.5 * weight * projector(phi_p),
                0.5 * weight * projector(phi_m),
            )
        )
    return BlockDecomposition(n, tuple(blocks))


def pc_build_r_analytic(n: int) -> tuple[np.ndarray, np.ndarray, BlockDecomposition]:
    """Closed-form ``R±`` built from the ``|φ±_{N,k}>`` blocks and the common edge term."""
    dec = block_decomposition(n)
    return dec.assemble(PLUS), dec.assemble(MINUS), dec


def pc_build_r_quadrature(n: int, m_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Average over a uniform φ grid; exact once ``m_points`` exceeds the trigonometric degree."""
    _check_n(n)
    if m_points < 2 * (n + 2):
        raise ValueError(f"m_points={m_points} below the exactness floor {2 * (n + 2)}")
    dim = 2 ** (n + 1)
    r_plus = np.zeros((dim, dim), dtype=complex)
    r_minus = np.zeros((dim, dim), dtype=complex)
    for phi in 2 * np.pi * np.arange(m_points) / m_points:
        plus, minus = pc_basis_kets(phi)
        prog = program_ket(n, phi)
        r_plus += projector(tensor(plus, prog))
        r_minus += projector(tensor(minus, prog))
    return 0.5 * r_plus / m_points, 0.5 * r_minus / m_points


# ------------------------------------------------------------------ closed forms


def ps_max(n: int) -> float:
    """Optimal deterministic success rate."""
    _check_n(n)
    s = sum(math.sqrt(math.comb(n, k) * math.comb(n, k - 1)) for k in range(1, n + 1))
    return 0.5 + s / 2 ** (n + 1)


def p_i_unambiguous_exact(n: int) -> Fraction:
    """Minimal inconclusive rate of the error-free multimeter as an exact rational.

    Uses the parity-resolved central-binomial form.
    """
    _check_n(n)
    if n % 2 == 0:
        m = n // 2
        return Fraction(math.comb(2 * m, m), 2 ** (2 * m))
    m = (n + 1) // 2
    return Fraction(math.comb(2 * m - 1, m - 1), 2 ** (2 * m - 1))


def p_i_unambiguous_sum_exact(n: int) -> Fraction:
    """Same quantity from the block overlap sum ``Σ|C(N,k)-C(N,k-1)|/2^{N+1} + 2^{-N}``."""
    _check_n(n)
    s = sum(abs(math.comb(n, k) - math.comb(n, k - 1)) for k in range(1, n + 1))
    return Fraction(s, 2 ** (n + 1)) + Fraction(1, 2**n)


def p_i_unambiguous(n: int) -> float:
    return float(p_i_unambiguous_exact(n))


# -------------------------------------------------------------------- POVMs


def _complement(dec: BlockDecomposition) -> np.ndarray:
    dim = 2 ** (dec.n + 1)
    return np.eye(dim) - dec.support_projector()


def pc_deterministic(n: int) -> tuple[Povm, float]:
    """Two-outcome optimal POVM ``Π± = Σ_k |Π±_{N,k}><Π±_{N,k}| + X/2``.

    The unpopulated complement is split evenly, like the edge term.
    """
    dec = block_decomposition(n)
    dim = 2 ** (n + 1)
    pi_plus = np.zeros((dim, dim), dtype=complex)
    pi_minus = np.zeros((dim, dim), dtype=complex)
    s = 1 / math.sqrt(2)
    for blk in dec.blocks:
        if blk.dim == 1:
            half = blk.embed(np.array([[0.5]]))
            pi_plus += half
            pi_minus += half
            continue
        pi_plus += blk.embed(projector(np.array([s, s])))
        pi_minus += blk.embed(projector(np.array([s, -s])))
    rest = _complement(dec)
    pi_plus += 0.5 * rest
    pi_minus += 0.5 * rest
    return Povm(layout(n), ((PLUS, pi_plus), (MINUS, pi_minus))), ps_max(n)


def pc_unambiguous(n: int) -> tuple[Povm, float]:
    """Error-free POVM: weighted projectors onto ``|φ⊥∓_{N,k}>``, remainder inconclusive."""
    dec = block_decomposition(n)
    dim = 2 ** (n + 1)
    pi_plus = np.zeros((dim, dim), dtype=complex)
    pi_minus = np.zeros((dim, dim), dtype=complex)
    for blk in dec.blocks:
        if blk.dim == 1:
            continue
        k, b = blk.k, blk.b_nk
        d_nk = 2 / (n + 1) * max(k, n + 1 - k)
        perp_minus = np.array([math.sqrt(b), math.sqrt(1 - b)])
        perp_plus = np.array([math.sqrt(b), -math.sqrt(1 - b)])
        pi_plus += blk.embed(projector(perp_minus)) / d_nk
        pi_minus += blk.embed(projector(perp_plus)) / d_nk
    pi_inc = np.eye(dim) - pi_plus - pi_minus
    povm = Povm(layout(n), ((PLUS, pi_plus), (MINUS, pi_minus), (INCONCLUSIVE, pi_inc)))
    return povm, p_i_unambiguous(n)


@dataclass(frozen=True)
class PcInterpolationParams:
    """Lagrange multiplier ``a`` and edge-block transition weight ``eta``."""

    a: float
    eta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a must lie in [0, 1], got {self.a}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")

    @property
    def at_transition(self) -> bool:
        return abs(self.a - 0.5) <= TIE_TOL


@dataclass(frozen=True)
class BlockSolution:
    k: int
    tan_phi: float
    p_s: float
    p_i: float
    flipped: bool


def block_angle(n: int, k: int, a: float) -> tuple[float, bool]:
    """``tan Φ_k`` and whether block k uses the mirrored orientation.

    In the mirrored orientation (``C(N,k) < C(N,k-1)``) the roles of
    ``|0>|N,k>`` and ``|1>|N,k-1>`` and of the two binomials are swapped.
    """
    c_k, c_km1 = math.comb(n, k), math.comb(n, k - 1)
    flipped = c_k < c_km1
    c_major, c_minor = (c_km1, c_k) if flipped else (c_k, c_km1)
    ratio = math.sqrt(c_major / c_minor)
    a_th = 0.5 * (1 + 1 / ratio)
    tan_phi = 1.0 if a < a_th else ratio * (2 * a - 1)
    return tan_phi, flipped


def block_solution(n: int, k: int, a: float) -> BlockSolution:
    """Per-block success and inconclusive rates, normalized to the block weight."""
    tan_phi, flipped = block_angle(n, k, a)
    c_k, c_km1 = math.comb(n, k), math.comb(n, k - 1)
    c_major, c_minor = (c_km1, c_k) if flipped else (c_k, c_km1)
    phi = math.atan(tan_phi)
    theta = math.atan(math.sqrt(c_minor / c_major))
    p_i = c_major / math.comb(n + 1, k) * (1 - 1 / tan_phi**2)
    p_s = math.cos(phi - theta) ** 2 / (2 * math.sin(phi) ** 2)
    return BlockSolution(k, tan_phi, p_s, p_i, flipped)


def edge_rates(params: PcInterpolationParams) -> tuple[float, float]:
    """(P_S, P_I) for a block where both hypotheses coincide."""
    if params.at_transition:
        return (1 - params.eta) / 2, params.eta
    if params.a < 0.5:
        return 0.5, 0.0
    return 0.0, 1.0


def pc_rates(n: int, params: PcInterpolationParams) -> tuple[float, float]:
    """Closed-form (P_S, P_I) of the optimal interpolating multimeter."""
    _check_n(n)
    norm = 2 ** (n + 1)
    p_s = p_i = 0.0
    for k in range(1, n + 1):
        sol = block_solution(n, k, params.a)
        w = math.comb(n + 1, k)
        p_s += w * sol.p_s
        p_i += w * sol.p_i
    e_s, e_i = edge_rates(params)
    p_s += 2 * e_s
    p_i += 2 * e_i
    return p_s / norm, p_i / norm


def pc_interpolated(n: int, params: PcInterpolationParams) -> tuple[Povm, float, float]:
    """Optimal three-outcome POVM at multiplier ``a`` (and ``eta`` when ``a = 1/2``).

    Returns the POVM together with its closed-form success and
    inconclusive rates.
    """
    dec = block_decomposition(n)
    dim = 2 ** (n + 1)
    ops = {label: np.zeros((dim, dim), dtype=complex) for label in (PLUS, MINUS, INCONCLUSIVE)}
    e_s, e_i = edge_rates(params)
    for blk in dec.blocks:
        if blk.dim == 1:
            ops[PLUS] += blk.embed(np.array([[e_s]]))
            ops[MINUS] += blk.embed(np.array([[e_s]]))
            ops[INCONCLUSIVE] += blk.embed(np.array([[e_i]]))
            continue
        tan_phi, flipped = block_angle(n, blk.k, params.a)
        phi = math.atan(tan_phi)
        c, s = math.cos(phi), math.sin(phi)
        major = np.array([0.0, 1.0]) if flipped else np.array([1.0, 0.0])
        minor = np.array([1.0, 0.0]) if flipped else np.array([0.0, 1.0])
        scale = 1 / (2 * s**2)
        ops[PLUS] += blk.embed(scale * projector(c * major + s * minor))
        ops[MINUS] += blk.embed(scale * projector(c * major - s * minor))
        ops[INCONCLUSIVE] += blk.embed((1 - 1 / tan_phi**2) * projector(major))
    ops[INCONCLUSIVE] += _complement(dec)
    povm = Povm(layout(n), tuple(ops.items()))
    p_s, p_i = pc_rates(n, params)
    return povm, p_s, p_i


def pc_params_for_p_i(n: int, p_i_target: float, tol: float = 1e-10) -> PcInterpolationParams:
    """Invert the forward map: find (a, eta) reaching ``p_i_target`` by bisection.

    P_I is nondecreasing in ``a`` and jumps at ``a = 1/2``, where ``eta``
    covers the gap.
    """
    p_max = p_i_unambiguous(n)
    if not 0.0 <= p_i_target <= p_max + tol:
        raise ValueError(f"target P_I={p_i_target} outside [0, {p_max}]")
    if p_i_target <= tol:
        return PcInterpolationParams(0.0)
    # At a=1/2, P_I is affine in eta; the plateau value at eta=1 is 2^-N.
    plateau = pc_rates(n, PcInterpolationParams(0.5, 1.0))[1]
    if p_i_target <= plateau + tol:
        base = pc_rates(n, PcInterpolationParams(0.5, 0.0))[1]
        eta = (p_i_target - base) / (plateau - base)
        return PcInterpolationParams(0.5, min(max(eta, 0.0), 1.0))
    lo, hi = 0.5, 1.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if pc_rates(n, PcInterpolationParams(mid))[1] < p_i_target:
            lo = mid
        else:
            hi = mid
    return PcInterpolationParams(hi)


# ------------------------------------------------------------------ tradeoff curve


@dataclass(frozen=True)
class TradeoffPoint:
    a: float
    eta: float
    p_i: float
    p_s: float

    @property
    def p_rs(self) -> float:
        return self.p_s / (1 - self.p_i) if self.p_i < 1 else 1.0


def pc_parameter_grid(grid_size: int) -> list[PcInterpolationParams]:
    """Sweep ``a`` over [0, 1], inserting an ``eta`` sweep at ``a = 1/2``."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    params = []
    for a in np.linspace(0.0, 1.0, grid_size):
        if a < 0.5 - TIE_TOL:
            params.append(PcInterpolationParams(float(a)))
    params.extend(PcInterpolationParams(0.5, float(eta)) for eta in np.linspace(0.0, 1.0, grid_size))
    for a in np.linspace(0.0, 1.0, grid_size):
        if a > 0.5 + TIE_TOL:
            params.append(PcInterpolationParams(float(a)))
    return params


def pc_tradeoff_curve(n: int, grid_size: int) -> list[TradeoffPoint]:
    """Sampled optimal (P_I, P_S) curve, ordered by increasing ``a`` then ``eta``."""
    _check_n(n)
    points = []
    for p in pc_parameter_grid(grid_size):
        p_s, p_i = pc_rates(n, p)
        points.append(TradeoffPoint(p.a, p.eta, p_i, p_s))
    return points


def pc_effective_data_povm(povm: Povm, phi: float, n: int) -> Povm:
    """Data-qubit POVM induced by the program ``|ψ+(φ)>^{⊗N}``."""
    if povm.layout != layout(n):
        raise ValueError(f"POVM layout {povm.layout} does not match N={n}")
    return effective_data_povm(povm, program_ket(n, phi))

