"""Dense linear algebra and POVM primitives shared by every multimeter module.

Operators are plain complex ``numpy`` arrays and kets are 1-D complex arrays.
Multi-partite operators are described by a layout, a tuple of subsystem
dimensions with the data register first and program registers after it.
Kronecker products put the left factor on the slowest-varying index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12
POVM_TOL = 1e-10

Layout = tuple[int, ...]


def ket(amplitudes: Iterable[complex]) -> np.ndarray:
    return np.asarray(list(amplitudes), dtype=complex)


def basis_ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def computational_ket(bits: str | Sequence[int], dim: int = 2) -> np.ndarray:
    """Product basis state ``|b0 b1 ...>`` with b0 on the slowest index."""
    digits = [int(b) for b in bits]
    index = 0
    for b in digits:
        index = index * dim + b
    return basis_ket(dim ** len(digits), index)


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of operators or kets, left factor varying slowest."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def _check_square_layout(m: np.ndarray, layout: Sequence[int]) -> Layout:
    dims = tuple(int(x) for x in layout)
    if any(x < 1 for x in dims):
        raise ValueError(f"layout dimensions must be positive, got {dims}")
    total = math.prod(dims)
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(f"operator of shape {m.shape} does not match layout {dims}")
    return dims


def partial_trace(m: np.ndarray, layout: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced operator on the subsystems listed in ``keep``.

    Kept subsystems retain their original relative order.
    """
    m = np.asarray(m, dtype=complex)
    dims = _check_square_layout(m, layout)
    n = len(dims)
    kept = sorted(set(int(k) for k in keep))
    for k in kept:
        if not 0 <= k < n:
            raise ValueError(f"subsystem index {k} out of range for {n} subsystems")
    if len(kept) == n:
        return m.copy()

    t = m.reshape(dims + dims)
    # One einsum label per ket axis; bra axes of traced subsystems reuse the ket label.
    letters = [chr(ord("a") + i) for i in range(n)] + [chr(ord("A") + i) for i in range(n)]
    ket_idx = letters[:n]
    bra_idx = [letters[n + i] if i in kept else letters[i] for i in range(n)]
    out = [letters[i] for i in kept] + [letters[n + i] for i in kept]
    subscripts = "".join(ket_idx) + "".join(bra_idx) + "->" + "".join(out)
    reduced = np.einsum(subscripts, t)
    d_keep = math.prod(dims[i] for i in kept) if kept else 1
    return reduced.reshape(d_keep, d_keep)


def embed_operator(op: np.ndarray, slots: Sequence[int], layout: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on ``slots`` (in the given order) to the full layout.

    The remaining subsystems receive the identity.
    """
    dims = tuple(int(x) for x in layout)
    n = len(dims)
    slots = [int(s) for s in slots]
    if sorted(set(slots)) != sorted(slots) or any(not 0 <= s < n for s in slots):
        raise ValueError(f"invalid slots {slots} for layout {dims}")
    rest = [s for s in range(n) if s not in slots]
    d_op = math.prod(dims[s] for s in slots)
    if op.shape != (d_op, d_op):
        raise ValueError(f"operator of shape {op.shape} does not act on slots {slots}")
    d_rest = math.prod(dims[s] for s in rest) if rest else 1
    full = np.kron(op, np.eye(d_rest, dtype=complex))
    order = slots + rest
    shape = [dims[s] for s in order]
    t = full.reshape(shape + shape)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    total = math.prod(dims)
    return t.reshape(total, total)


def embed_ket(v: np.ndarray, slots: Sequence[int], layout: Sequence[int]) -> np.ndarray:
    """Reorder a ket whose factors are given in ``slots`` order into layout order.

    ``slots`` must be a permutation of all subsystem indices.
    """
    dims = tuple(int(x) for x in layout)
    slots = [int(s) for s in slots]
    if sorted(slots) != list(range(len(dims))):
        raise ValueError("embed_ket needs a permutation of all subsystems")
    t = np.asarray(v, dtype=complex).reshape([dims[s] for s in slots])
    return t.transpose(np.argsort(slots)).reshape(-1)


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and bool(
        np.max(np.abs(h - dagger(h)), initial=0.0) <= tol
    )


def herm_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in descending order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("herm_eig requires a Hermitian matrix")
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w, _ = herm_eig(m)
    return float(np.sum(np.abs(w)))


def min_eigenvalue(h: np.ndarray) -> float:
    h = np.asarray(h, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (h + dagger(h)))[0])


def symmetric_basis_state(n: int, k: int) -> np.ndarray:
    """Normalized symmetric n-qubit state with k excitations (Dicke state)."""
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    dim = 2**n
    idx = np.arange(dim)
    weights = np.array([bin(i).count("1") for i in idx])
    v = np.where(weights == k, 1.0, 0.0).astype(complex)
    return v / math.sqrt(math.comb(n, k))


def symmetric_projector(n: int) -> np.ndarray:
    """Projector onto the symmetric subspace of n qubits."""
    return sum(projector(symmetric_basis_state(n, k)) for k in range(n + 1))


# --------------------------------------------------------------------------- POVMs


@dataclass(frozen=True)
class Povm:
    """Labelled POVM elements on a multi-partite space."""

    layout: Layout
    elements: tuple[tuple[str, np.ndarray], ...]
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        layout = tuple(int(x) for x in self.layout)
        object.__setattr__(self, "layout", layout)
        dim = math.prod(layout)
        frozen = []
        for label, op in self.elements:
            arr = np.array(op, dtype=complex)
            if arr.shape != (dim, dim):
                raise ValueError(f"element {label!r} has shape {arr.shape}, expected {(dim, dim)}")
            arr.setflags(write=False)
            frozen.append((str(label), arr))
        labels = [label for label, _ in frozen]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate POVM labels: {labels}")
        object.__setattr__(self, "elements", tuple(frozen))
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(labels)})

    @classmethod
    def from_mapping(cls, layout: Sequence[int], elements: Mapping[str, np.ndarray]) -> "Povm":
        return cls(tuple(layout), tuple(elements.items()))

    @property
    def dim(self) -> int:
        return math.prod(self.layout)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.elements)

    def __getitem__(self, label: str) -> np.ndarray:
        return self.elements[self._index[label]][1]

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def get(self, label: str) -> np.ndarray:
        """Element for ``label``, or the zero operator if absent."""
        if label in self._index:
            return self[label]
        return np.zeros((self.dim, self.dim), dtype=complex)

    def total(self) -> np.ndarray:
        return sum(op for _, op in self.elements)

    def map(self, fn) -> "Povm":
        return Povm(self.layout, tuple((label, fn(op)) for label, op in self.elements))

    def to_dict(self) -> dict:
        return {
            "layout": list(self.layout),
            "elements": [{"label": label, "operator": matrix_to_json(op)} for label, op in self.elements],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Povm":
        return cls(
            tuple(data["layout"]),
            tuple((e["label"], matrix_from_json(e["operator"])) for e in data["elements"]),
        )


@dataclass(frozen=True)
class PovmReport:
    passed: bool
    completeness_residual: float
    min_eigenvalue: float
    hermiticity_residual: float
    tol: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "completeness_residual": self.completeness_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "hermiticity_residual": self.hermiticity_residual,
            "tol": self.tol,
        }


def validate_povm(p: Povm, tol: float = POVM_TOL) -> PovmReport:
    """Check positivity and completeness of ``p``; never raises."""
    eye = np.eye(p.dim)
    completeness = float(np.max(np.abs(p.total() - eye)))
    herm = max(float(np.max(np.abs(op - dagger(op)))) for _, op in p.elements)
    min_eig = min(min_eigenvalue(op) for _, op in p.elements)
    passed = completeness <= tol and herm <= tol and min_eig >= -tol
    return PovmReport(passed, completeness, min_eig, herm, tol)


def effective_data_povm(p: Povm, program: np.ndarray) -> Povm:
    """POVM induced on the data register (subsystem 0) by a pure program state.

    Computes ``Tr_p[(1_d ⊗ |Ψ><Ψ|) Π]`` for every element.
    """
    d_data = p.layout[0]
    program = np.asarray(program, dtype=complex)
    d_prog = p.dim // d_data
    if program.shape != (d_prog,):
        raise ValueError(f"program ket has shape {program.shape}, expected ({d_prog},)")

    def reduce_op(op: np.ndarray) -> np.ndarray:
        t = op.reshape(d_data, d_prog, d_data, d_prog)
        return np.einsum("q,aqbp,p->ab", program.conj(), t, program)

    return Povm((d_data,), tuple((label, reduce_op(op)) for label, op in p.elements))


# ------------------------------------------------------------------ serialization


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    rows, cols = m.shape
    flat = m.reshape(-1)
    return {"rows": rows, "cols": cols, "re": flat.real.tolist(), "im": flat.imag.tolist()}


def matrix_from_json(data: Mapping) -> np.ndarray:
    rows, cols = int(data["rows"]), int(data["cols"])
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("matrix JSON entry count does not match rows*cols")
    return (re + 1j * im).reshape(rows, cols)
