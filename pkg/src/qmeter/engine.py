"""Numerical oracle for discriminating two mixed states.

Both hypotheses carry equal prior 1/2, folded into the operators: every
``r_plus``/``r_minus`` passed here has trace 1/2, so that success probability
is simply ``Tr[Π+ R+] + Tr[Π- R-]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Povm,
    dagger,
    herm_eig,
    is_hermitian,
    matrix_to_json,
    min_eigenvalue,
    projector,
)

PRIOR_TRACE = 0.5
TRACE_TOL = 1e-10
CERT_TOL = 1e-8

PLUS, MINUS, INCONCLUSIVE = "+", "-", "?"


@dataclass(frozen=True)
class HelstromResult:
    p_success: float
    povm: Povm


@dataclass(frozen=True)
class ExtremalCertificate:
    """Residuals of the fixed-inconclusive-rate optimality conditions.

    ``psd_*`` entries are minimum eigenvalues (should be >= -tol);
    ``slack_*`` entries are max-abs entries of the complementary-slackness
    products (should be <= tol).
    """

    lambda_op: np.ndarray
    a: float
    residuals: dict[str, float]
    tol: float = CERT_TOL

    @property
    def passed(self) -> bool:
        for name, value in self.residuals.items():
            if name.startswith("psd_"):
                if value < -self.tol:
                    return False
            elif value > self.tol:
                return False
        return True

    @property
    def max_violation(self) -> float:
        worst = 0.0
        for name, value in self.residuals.items():
            worst = max(worst, -value if name.startswith("psd_") else value)
        return worst

    def to_dict(self, include_lambda: bool = False) -> dict:
        out = {"a": self.a, "passed": self.passed, "tol": self.tol, "residuals": dict(self.residuals)}
        if include_lambda:
            out["lambda"] = matrix_to_json(self.lambda_op)
        return out


def _check_pair(r_plus: np.ndarray, r_minus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r_plus = np.asarray(r_plus, dtype=complex)
    r_minus = np.asarray(r_minus, dtype=complex)
    if r_plus.shape != r_minus.shape:
        raise ValueError("R+ and R- must have the same shape")
    for name, r in (("R+", r_plus), ("R-", r_minus)):
        if not is_hermitian(r):
            raise ValueError(f"{name} is not Hermitian")
        tr = np.trace(r).real
        if abs(tr - PRIOR_TRACE) > TRACE_TOL:
            raise ValueError(f"{name} has trace {tr:.12g}; priors must be folded in (trace 1/2)")
    return r_plus, r_minus


def helstrom(r_plus: np.ndarray, r_minus: np.ndarray, layout: tuple[int, ...] | None = None) -> HelstromResult:
    """Minimum-error discrimination of two weighted mixed states.

    Π+ projects onto the non-negative eigenspace of ``R+ - R-``; the kernel
    is assigned to Π+ so the output is deterministic.
    """
    r_plus, r_minus = _check_pair(r_plus, r_minus)
    dim = r_plus.shape[0]
    w, v = herm_eig(r_plus - r_minus)
    # Exact zeros in exact arithmetic land as ~1e-17 either side; treat them as zero.
    nonneg = w >= -1e-13
    pi_plus = v[:, nonneg] @ dagger(v[:, nonneg])
    pi_minus = np.eye(dim) - pi_plus
    layout = layout or (dim,)
    povm = Povm(layout, ((PLUS, pi_plus), (MINUS, pi_minus)))
    p_success = 0.5 + 0.5 * float(np.sum(np.abs(w)))
    return HelstromResult(p_success, povm)


def unambiguous_pure_pair(a: np.ndarray, b: np.ndarray, weight: float = 1.0) -> tuple[dict[str, np.ndarray], float]:
    """Optimal equal-prior unambiguous discriminator of two pure states.

    Returns the block POVM elements ``{"+", "-", "?"}`` on the span of the
    two kets (expressed in the ambient space) and the weighted failure
    probability ``weight * |<a|b>|``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for v in (a, b):
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("unambiguous_pure_pair needs unit kets")
    overlap = np.vdot(a, b)
    s = abs(overlap)
    if s > 1.0 - 1e-12:
        raise ValueError("identical states cannot be discriminated unambiguously")

    # Orthonormal frame of span{a, b}; a_perp/b_perp are the in-span complements.
    e1 = a
    rest = b - overlap * a
    e2 = rest / np.linalg.norm(rest)
    a_perp = e2
    b_in = np.array([np.vdot(e1, b), np.vdot(e2, b)])
    b_perp = -np.conj(b_in[1]) * e1 + np.conj(b_in[0]) * e2
    b_perp = b_perp / np.linalg.norm(b_perp)

    scale = 1.0 / (1.0 + s)
    pi_plus = scale * projector(b_perp)
    pi_minus = scale * projector(a_perp)
    span = projector(e1) + projector(e2)
    pi_inc = span - pi_plus - pi_minus
    return {PLUS: pi_plus, MINUS: pi_minus, INCONCLUSIVE: pi_inc}, weight * s


def _check_labels(povm: Povm) -> None:
    labels = set(povm.labels)
    if labels not in ({PLUS, MINUS}, {PLUS, MINUS, INCONCLUSIVE}):
        raise ValueError(f"expected labels {{+,-}} or {{+,-,?}}, got {sorted(labels)}")


def p_rates(povm: Povm, r_plus: np.ndarray, r_minus: np.ndarray) -> tuple[float, float, float]:
    """Success, inconclusive and error probabilities of ``povm``."""
    _check_labels(povm)
    r_plus, r_minus = _check_pair(r_plus, r_minus)
    p_s = np.trace(povm[PLUS] @ r_plus).real + np.trace(povm[MINUS] @ r_minus).real
    p_i = np.trace(povm.get(INCONCLUSIVE) @ (r_plus + r_minus)).real
    p_e = 1.0 - p_s - p_i
    return float(p_s), float(p_i), float(p_e)


def verify_extremal(
    povm: Povm,
    r_plus: np.ndarray,
    r_minus: np.ndarray,
    a: float,
    tol: float = CERT_TOL,
) -> ExtremalCertificate:
    """Check the stationarity and dual-feasibility conditions at multiplier ``a``.

    The Lagrange operator is rebuilt from the equalities as
    ``λ = ½R+Π+ + ½R-Π- + a R?Π?`` and symmetrized; the certificate is
    judged only on the residuals.
    """
    _check_labels(povm)
    r_plus, r_minus = _check_pair(r_plus, r_minus)
    r_inc = 0.5 * (r_plus + r_minus)
    pi_p, pi_m, pi_i = povm[PLUS], povm[MINUS], povm.get(INCONCLUSIVE)

    lam = 0.5 * r_plus @ pi_p + 0.5 * r_minus @ pi_m + a * r_inc @ pi_i
    asym = float(np.max(np.abs(lam - dagger(lam))))
    lam = 0.5 * (lam + dagger(lam))

    g_plus = lam - 0.5 * r_plus
    g_minus = lam - 0.5 * r_minus
    g_inc = lam - a * r_inc
    residuals = {
        "lambda_asymmetry": asym,
        "slack_plus": float(np.max(np.abs(g_plus @ pi_p))),
        "slack_minus": float(np.max(np.abs(g_minus @ pi_m))),
        "slack_inconclusive": float(np.max(np.abs(g_inc @ pi_i))),
        "psd_plus": min_eigenvalue(g_plus),
        "psd_minus": min_eigenvalue(g_minus),
        "psd_inconclusive": min_eigenvalue(g_inc),
    }
    return ExtremalCertificate(lam, float(a), residuals, tol)
