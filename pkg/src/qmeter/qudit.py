"""Error-free universal multimeter for qudits built on antisymmetric projections.

Layout: ``d + 1`` qudit slots, the data qudit in slot 0 and program qudits in
slots ``1..d``. Basis labels ``|1>..|d>`` map to array indices ``0..d-1``.
Outcome ``j`` projects the data qudit together with every program qudit
except the j-th onto their (unique) totally antisymmetric state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .core import Povm, basis_ket, effective_data_povm, embed_ket, embed_operator, projector, tensor
from .engine import INCONCLUSIVE

MAX_STATE_D = 5
MAX_POVM_D = 4


def layout(d: int) -> tuple[int, ...]:
    return (d,) * (d + 1)


def outcome_label(j: int) -> str:
    return str(j)


def permutation_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def antisymmetric_ket(d: int) -> np.ndarray:
    """Slater determinant of d qudits: ``Σ_perm sgn |i1..id> / √d!``."""
    v = np.zeros(d**d, dtype=complex)
    strides = d ** np.arange(d - 1, -1, -1)
    for perm in itertools.permutations(range(d)):
        v[int(np.dot(perm, strides))] += permutation_sign(perm)
    return v / math.sqrt(math.factorial(d))


def participating_slots(d: int, j: int) -> tuple[int, ...]:
    return tuple(s for s in range(d + 1) if s != j)


@dataclass(frozen=True)
class AntisymState:
    """Antisymmetric state on the data qudit and all program qudits but ``j``.

    ``ket`` is expressed over ``slots`` in ascending order (dimension d^d).
    """

    d: int
    excluded_program_index: int
    ket: np.ndarray

    @property
    def slots(self) -> tuple[int, ...]:
        return participating_slots(self.d, self.excluded_program_index)


def _check_j(d: int, j: int) -> None:
    if not 1 <= j <= d:
        raise ValueError(f"program index must lie in 1..{d}, got {j}")


def qd_antisymmetric_state(d: int, j: int) -> AntisymState:
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if d > MAX_STATE_D:
        raise ValueError(f"d={d} exceeds the dense-state cap d <= {MAX_STATE_D}")
    _check_j(d, j)
    return AntisymState(d, j, antisymmetric_ket(d))


def qd_povm(d: int, scale: float = 1.0) -> Povm:
    """POVM ``Π_j = d/(d+1) |Σ->_{j̄}<Σ-| ⊗ 1_j`` plus the inconclusive remainder.

    ``scale`` multiplies every conclusive element; values above 1 are only
    useful to probe that the normalization is already maximal.
    """
    if not 2 <= d <= MAX_POVM_D:
        raise ValueError(f"full POVM construction supports 2 <= d <= {MAX_POVM_D}, got {d}")
    lay = layout(d)
    c = scale * d / (d + 1)
    sigma = projector(antisymmetric_ket(d))
    elements = []
    for j in range(1, d + 1):
        elements.append((outcome_label(j), c * embed_operator(sigma, participating_slots(d, j), lay)))
    total = sum(op for _, op in elements)
    elements.append((INCONCLUSIVE, np.eye(d ** (d + 1)) - total))
    return Povm(lay, tuple(elements))


def qd_y_operator(d: int) -> np.ndarray:
    """Unnormalized sum of the conclusive projections; ``C`` is its inverse top eigenvalue."""
    if not 2 <= d <= MAX_POVM_D:
        raise ValueError(f"Y is built densely only for 2 <= d <= {MAX_POVM_D}")
    sigma = projector(antisymmetric_ket(d))
    lay = layout(d)
    return sum(embed_operator(sigma, participating_slots(d, j), lay) for j in range(1, d + 1))


def qd_f_vector(d: int, j: int) -> np.ndarray:
    """``|f_j> = |Σ->_{j̄} ⊗ |1>_j`` in the full (d+1)-slot space."""
    state = qd_antisymmetric_state(d, j)
    v = tensor(state.ket, basis_ket(d, 0))
    return embed_ket(v, list(state.slots) + [j], layout(d))


@dataclass(frozen=True)
class GramF:
    """Gram matrix of the ``|f_j>`` vectors.

    ``matrix`` is the closed form; ``numeric`` holds inner products of the
    explicit vectors when they were computed.
    """

    d: int
    matrix: np.ndarray
    numeric: np.ndarray | None = None

    @property
    def max_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[-1])


def gram_closed_form(d: int) -> np.ndarray:
    idx = np.arange(1, d + 1)
    sign = (-1.0) ** (idx[:, None] + idx[None, :] - 1)
    f = sign / d
    np.fill_diagonal(f, 1.0)
    return f


def qd_gram_f(d: int, numeric: bool | None = None) -> GramF:
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if numeric is None:
        numeric = d <= MAX_POVM_D
    num = None
    if numeric:
        vecs = [qd_f_vector(d, j) for j in range(1, d + 1)]
        num = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    return GramF(d, gram_closed_form(d), num)


def success_probability(d: int) -> float:
    """``d / (d+1)!``"""
    return d / math.factorial(d + 1)


# ------------------------------------------------------------------ universality


def haar_unitary(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    if size is None:
        return unitary_group.rvs(d, random_state=rng)
    u = unitary_group.rvs(d, size=size, random_state=rng)
    return u.reshape(size, d, d)


def program_ket(u: np.ndarray) -> np.ndarray:
    """``U^{⊗d} |1,2,...,d>``: the columns of U in order."""
    return tensor(*(u[:, i] for i in range(u.shape[0])))


def sample_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass(frozen=True)
class UniversalityReport:
    d: int
    n_samples: int
    seed: int
    max_abs_deviation: float
    p_s_estimate: float
    max_effective_deviation: float

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "max_abs_deviation": self.max_abs_deviation,
            "p_s_estimate": self.p_s_estimate,
            "max_effective_deviation": self.max_effective_deviation,
        }


def outcome_table(povm: Povm, u: np.ndarray) -> np.ndarray:
    """``table[j-1, l]``: probability of outcome ``l`` for data ``U|j>`` and program ``U^{⊗d}|1..d>``."""
    d = u.shape[0]
    prog = program_ket(u)
    table = np.empty((d, len(povm.elements)))
    for j in range(d):
        psi = np.kron(u[:, j], prog)
        for col, (_, op) in enumerate(povm.elements):
            table[j, col] = np.vdot(psi, op @ psi).real
    return table


def qd_universality_check(d: int, n_samples: int, seed: int, povm: Povm | None = None) -> UniversalityReport:
    """Check basis independence of the outcome statistics on Haar-random programs.

    Each sample draws its unitary from an independent stream keyed by
    ``(seed, sample_index)``. Deviations are measured against
    ``δ_jk d/(d+1)!`` for the conclusive outcomes and against
    ``π_j = P_S |ψ_j><ψ_j|`` for the induced data POVM.
    """
    povm = povm if povm is not None else qd_povm(d)
    p_s = success_probability(d)
    expected = np.zeros((d, d + 1))
    expected[:, :d] = p_s * np.eye(d)
    expected[:, d] = 1 - p_s
    worst = 0.0
    worst_eff = 0.0
    hits = []
    for i in range(n_samples):
        u = haar_unitary(d, sample_stream(seed, i))
        table = outcome_table(povm, u)
        worst = max(worst, float(np.max(np.abs(table - expected))))
        hits.append(np.trace(table[:, :d]) / d)
        eff = effective_data_povm(povm, program_ket(u))
        for j in range(1, d + 1):
            target = p_s * projector(u[:, j - 1])
            worst_eff = max(worst_eff, float(np.max(np.abs(eff[outcome_label(j)] - target))))
        worst_eff = max(worst_eff, float(np.max(np.abs(eff[INCONCLUSIVE] - (1 - p_s) * np.eye(d)))))
    return UniversalityReport(d, n_samples, seed, worst, float(np.mean(hits)), worst_eff)
