"""Universal qubit multimeter with the two-qubit program ``|ψ+>|ψ->``.

Three qubits: data, then the two program qubits. Averaging over the Bloch
sphere leaves ``R±`` supported on the symmetric subspace (common to both
hypotheses) plus the two-dimensional spans ``{A±, B±}``. The A sector holds
two excitations and the B sector one, so the sectors are mutually
orthogonal and orthogonal to the symmetric subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Povm, computational_ket, effective_data_povm, projector, symmetric_projector, tensor
from .engine import INCONCLUSIVE, MINUS, PLUS

LAYOUT = (2, 2, 2)
SQRT3 = math.sqrt(3.0)

PS_MAX = 0.5 * (1 + 1 / SQRT3)
P_I_UNAMBIGUOUS = 2 / 3
P_I_SEAM = 1 / 3


def _k(bits: str) -> np.ndarray:
    return computational_ket(bits)


def bloch_basis_kets(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = np.exp(1j * phi)
    return np.array([c, e * s]), np.array([s, -e * c])


def program_ket(theta: float, phi: float) -> np.ndarray:
    plus, minus = bloch_basis_kets(theta, phi)
    return tensor(plus, minus)


@dataclass(frozen=True)
class UmSpectralData:
    sym_projector: np.ndarray
    a_plus: np.ndarray
    b_plus: np.ndarray
    a_minus: np.ndarray
    b_minus: np.ndarray


def um_symmetric_projector() -> np.ndarray:
    return symmetric_projector(3)


def spectral_data() -> UmSpectralData:
    r6 = 1 / math.sqrt(6)
    a_plus = r6 * (_k("011") + _k("101") - 2 * _k("110"))
    b_plus = r6 * (-2 * _k("001") + _k("010") + _k("100"))
    a_minus = r6 * (-_k("011") + 2 * _k("101") - _k("110"))
    b_minus = r6 * (-_k("001") + 2 * _k("010") - _k("100"))
    return UmSpectralData(um_symmetric_projector(), a_plus, b_plus, a_minus, b_minus)


def sector_axes(plus: np.ndarray, minus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a 60-degree pair as ``(√3 β ± α)/2`` and return ``(α, β)``."""
    return plus - minus, (plus + minus) / SQRT3


def um_build_r_analytic() -> tuple[np.ndarray, np.ndarray, UmSpectralData]:
    sd = spectral_data()
    r_plus = sd.sym_projector / 12 + (projector(sd.a_plus) + projector(sd.b_plus)) / 3
    r_minus = sd.sym_projector / 12 + (projector(sd.a_minus) + projector(sd.b_minus)) / 3
    return 0.5 * r_plus, 0.5 * r_minus, sd


def um_build_r_haar(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Bloch-sphere average by Gauss-Legendre in cos(θ) times a uniform φ grid.

    The integrand is a cubic polynomial in cos(θ) with Fourier modes up to
    ``|m| = 3`` in φ, so the rule is exact at or above the node floors.
    """
    if n_theta < 3 or n_phi < 6:
        raise ValueError(f"need n_theta >= 3 and n_phi >= 6, got ({n_theta}, {n_phi})")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    r_plus = np.zeros((8, 8), dtype=complex)
    r_minus = np.zeros((8, 8), dtype=complex)
    for xi, wi in zip(x, w):
        theta = math.acos(xi)
        for phi in 2 * np.pi * np.arange(n_phi) / n_phi:
            plus, minus = bloch_basis_kets(theta, phi)
            prog = tensor(plus, minus)
            weight = wi / 2 / n_phi
            r_plus += weight * projector(tensor(plus, prog))
            r_minus += weight * projector(tensor(minus, prog))
    return 0.5 * r_plus, 0.5 * r_minus


def _phi_vectors() -> tuple[np.ndarray, np.ndarray]:
    c = 1 / (2 * SQRT3)
    phi1 = c * ((SQRT3 + 1) * _k("001") - (SQRT3 - 1) * _k("010") - 2 * _k("100"))
    phi2 = c * ((SQRT3 + 1) * _k("110") - (SQRT3 - 1) * _k("101") - 2 * _k("011"))
    return phi1, phi2


def deterministic_plus() -> np.ndarray:
    phi1, phi2 = _phi_vectors()
    return 0.5 * um_symmetric_projector() + projector(phi1) + projector(phi2)


def um_deterministic() -> tuple[Povm, float]:
    pi_plus = deterministic_plus()
    return Povm(LAYOUT, ((PLUS, pi_plus), (MINUS, np.eye(8) - pi_plus))), PS_MAX


def um_unambiguous() -> tuple[Povm, float]:
    """Scaled projectors onto the kernels of ``R∓``; the rest is inconclusive."""
    r2 = 1 / math.sqrt(2)
    chi1 = r2 * (_k("001") - _k("100"))
    chi2 = r2 * (_k("011") - _k("110"))
    kappa1 = r2 * (_k("010") - _k("100"))
    kappa2 = r2 * (_k("011") - _k("101"))
    pi_plus = 2 / 3 * (projector(chi1) + projector(chi2))
    pi_minus = 2 / 3 * (projector(kappa1) + projector(kappa2))
    pi_inc = np.eye(8) - pi_plus - pi_minus
    return Povm(LAYOUT, ((PLUS, pi_plus), (MINUS, pi_minus), (INCONCLUSIVE, pi_inc))), P_I_UNAMBIGUOUS


def pair_rates(tan_phi: float) -> tuple[float, float]:
    """(P'_S, P'_I) for one 60-degree pair measured at angle Φ."""
    return (SQRT3 / tan_phi + 1) ** 2 / 8, 0.75 * (1 - 1 / tan_phi**2)


def tan_phi_for_p_i(p_i: float) -> float:
    """Angle reaching total ``P_I`` once the symmetric subspace is fully inconclusive."""
    return 1 / math.sqrt(5 / 3 - 2 * p_i)


def lagrange_multiplier(p_i: float) -> float:
    """Multiplier ``a`` at which the interpolated POVM for ``p_i`` is extremal."""
    _check_p_i(p_i)
    if p_i <= P_I_SEAM:
        return 0.5
    return 0.5 * (1 + tan_phi_for_p_i(p_i) / SQRT3)


def _check_p_i(p_i: float) -> None:
    if not 0.0 <= p_i <= P_I_UNAMBIGUOUS + 1e-12:
        raise ValueError(f"P_I must lie in [0, 2/3], got {p_i}")


def um_ps_of_pi(p_i: float) -> float:
    """Optimal success rate at a fixed inconclusive rate (piecewise)."""
    _check_p_i(p_i)
    if p_i <= P_I_SEAM:
        return PS_MAX - p_i / 2
    return 0.5 - p_i / 2 + math.sqrt(max(1.25 - 1.5 * p_i, 0.0)) / 3


def _sector_povm(plus: np.ndarray, minus: np.ndarray, tan_phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    alpha, beta = sector_axes(plus, minus)
    phi = math.atan(tan_phi)
    c, s = math.cos(phi), math.sin(phi)
    xi_plus = c * beta + s * alpha
    xi_minus = c * beta - s * alpha
    scale = 1 / (2 * s**2)
    return scale * projector(xi_plus), scale * projector(xi_minus), (1 - 1 / tan_phi**2) * projector(beta)


def um_interpolated(p_i_target: float) -> tuple[Povm, float]:
    """Optimal POVM at a prescribed inconclusive rate in [0, 2/3].

    Up to P_I = 1/3 a growing share of the symmetric subspace is moved to
    the inconclusive outcome; beyond it both 60-degree pairs are rotated
    towards unambiguous discrimination.
    """
    _check_p_i(p_i_target)
    p_i = min(p_i_target, P_I_UNAMBIGUOUS)
    sym = um_symmetric_projector()
    if p_i <= P_I_SEAM:
        det, _ = um_deterministic()
        elements = (
            (PLUS, det[PLUS] - 1.5 * p_i * sym),
            (MINUS, det[MINUS] - 1.5 * p_i * sym),
            (INCONCLUSIVE, 3 * p_i * sym),
        )
    else:
        sd = spectral_data()
        tan_phi = tan_phi_for_p_i(p_i)
        pa, ma, ia = _sector_povm(sd.a_plus, sd.a_minus, tan_phi)
        pb, mb, ib = _sector_povm(sd.b_plus, sd.b_minus, tan_phi)
        elements = ((PLUS, pa + pb), (MINUS, ma + mb), (INCONCLUSIVE, sym + ia + ib))
    return Povm(LAYOUT, elements), um_ps_of_pi(p_i)


def um_rates_from_sectors(p_i: float) -> tuple[float, float]:
    """(P_S, P_I) assembled from the identical-state and pair sectors.

    Independent of :func:`um_ps_of_pi`; used to cross-check the piecewise law.
    """
    _check_p_i(p_i)
    if p_i <= P_I_SEAM:
        eta = 3 * p_i
        ps_sym, pi_sym = (1 - eta) / 2, eta
        ps_pair, pi_pair = pair_rates(1.0)
    else:
        ps_sym, pi_sym = 0.0, 1.0
        ps_pair, pi_pair = pair_rates(tan_phi_for_p_i(p_i))
    return ps_sym / 3 + 2 * ps_pair / 3, pi_sym / 3 + 2 * pi_pair / 3


def um_effective_data_povm(povm: Povm, theta: float, phi: float) -> Povm:
    return effective_data_povm(povm, program_ket(theta, phi))


def um_curve(grid_size: int) -> list[tuple[float, float, float]]:
    """Rows ``(P_I, P_S, P_RS)`` sampled uniformly on [0, 2/3]."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    rows = []
    for p_i in np.linspace(0.0, P_I_UNAMBIGUOUS, grid_size):
        p_s = um_ps_of_pi(float(p_i))
        rows.append((float(p_i), p_s, p_s / (1 - p_i)))
    return rows
