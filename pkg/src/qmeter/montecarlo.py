"""Born-rule sampling of multimeter outcomes.

Every trial draws a measurement basis, prepares one basis state on the data
register (uniform prior), forms the joint data+program pure state, and
samples one POVM outcome. Trials are grouped into fixed-size blocks; each
block owns an independent random stream keyed by ``(seed, block_index)``,
so the report does not depend on how blocks are spread over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import phase_covariant as pc
from . import qudit as qd
from . import universal_qubit as um
from .core import Povm
from .engine import INCONCLUSIVE, MINUS, PLUS

BLOCK_SIZE = 4096
DUST_TOL = 1e-10
THREADS_ENV = "QMETER_THREADS"

FAMILIES = ("deterministic", "unambiguous", "interpolated")
KINDS = ("pc", "um", "qd")


class SamplingError(RuntimeError):
    """Outcome probabilities violated the Born-rule contract beyond round-off."""


@dataclass(frozen=True)
class Scenario:
    """Which multimeter to simulate.

    ``pc`` uses ``n``, and for the interpolated family ``a`` and ``eta``;
    ``um`` uses ``p_i`` for the interpolated family; ``qd`` uses ``d`` and
    is always error-free.
    """

    kind: str
    family: str = "deterministic"
    n: int = 2
    a: float = 0.0
    eta: float = 0.0
    p_i: float = 0.0
    d: int = 3

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.kind != "qd" and self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")

    @property
    def error_free(self) -> bool:
        return self.kind == "qd" or self.family == "unambiguous"

    def describe(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "qd":
            out["d"] = self.d
            return out
        out["family"] = self.family
        if self.kind == "pc":
            out["n"] = self.n
            if self.family == "interpolated":
                out.update(a=self.a, eta=self.eta)
        elif self.family == "interpolated":
            out["p_i"] = self.p_i
        return out

    def build(self) -> tuple[Povm, tuple[float, float, float]]:
        """Joint POVM and its closed-form (P_S, P_I, P_E)."""
        if self.kind == "pc":
            if self.family == "deterministic":
                povm, p_s = pc.pc_deterministic(self.n)
                p_i = 0.0
            elif self.family == "unambiguous":
                povm, p_i = pc.pc_unambiguous(self.n)
                p_s = 1 - p_i
            else:
                povm, p_s, p_i = pc.pc_interpolated(self.n, pc.PcInterpolationParams(self.a, self.eta))
        elif self.kind == "um":
            if self.family == "deterministic":
                povm, p_s = um.um_deterministic()
                p_i = 0.0
            elif self.family == "unambiguous":
                povm, p_i = um.um_unambiguous()
                p_s = 1 - p_i
            else:
                povm, p_s = um.um_interpolated(self.p_i)
                p_i = self.p_i
        else:
            povm = qd.qd_povm(self.d)
            p_s = qd.success_probability(self.d)
            p_i = 1 - p_s
        return povm, (p_s, p_i, max(1 - p_s - p_i, 0.0))


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int
    scenario: Scenario

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass(frozen=True)
class SimReport:
    scenario: dict
    trials: int
    seed: int
    counts: dict[str, int]
    successes: int
    inconclusive: int
    errors: int
    analytic_reference: dict[str, float] = field(default_factory=dict)

    def _rate(self, k: int) -> tuple[float, float]:
        p = k / self.trials
        return p, math.sqrt(p * (1 - p) / self.trials)

    @property
    def p_success_hat(self) -> float:
        return self._rate(self.successes)[0]

    @property
    def p_inconclusive_hat(self) -> float:
        return self._rate(self.inconclusive)[0]

    @property
    def p_error_hat(self) -> float:
        return self._rate(self.errors)[0]

    def standard_errors(self) -> dict[str, float]:
        return {
            "p_success": self._rate(self.successes)[1],
            "p_inconclusive": self._rate(self.inconclusive)[1],
            "p_error": self._rate(self.errors)[1],
        }

    def estimates(self) -> dict[str, float]:
        return {
            "p_success": self.p_success_hat,
            "p_inconclusive": self.p_inconclusive_hat,
            "p_error": self.p_error_hat,
        }

    def z_scores(self) -> dict[str, float]:
        """Deviation from the analytic rates in units of the binomial standard error.

        The standard error is evaluated at the analytic rate so a rate of 0
        or 1 matched exactly gives z = 0.
        """
        out = {}
        for key, p_hat in self.estimates().items():
            p = self.analytic_reference[key]
            se = math.sqrt(p * (1 - p) / self.trials)
            if se == 0.0:
                out[key] = 0.0 if p_hat == p else math.inf
            else:
                out[key] = (p_hat - p) / se
        return out

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "trials": self.trials,
            "seed": self.seed,
            "counts": dict(self.counts),
            "estimates": self.estimates(),
            "standard_errors": self.standard_errors(),
            "analytic_reference": dict(self.analytic_reference),
        }

    def summary_table(self) -> str:
        se = self.standard_errors()
        lines = [f"{'rate':<16}{'estimate':>12}{'std.err':>12}{'analytic':>12}"]
        for key, p_hat in self.estimates().items():
            lines.append(f"{key:<16}{p_hat:>12.6f}{se[key]:>12.6f}{self.analytic_reference[key]:>12.6f}")
        lines.append(f"{'trials':<16}{self.trials:>12d}")
        return "\n".join(lines)


# ---------------------------------------------------------------------- sampling


def _batched_kron(*vectors: np.ndarray) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.einsum("bi,bj->bij", out, v).reshape(out.shape[0], -1)
    return out


def _draw_states(scenario: Scenario, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Joint kets ``(size, dim)`` and the prepared data label index per trial."""
    if scenario.kind == "pc":
        phi = rng.uniform(0.0, 2 * np.pi, size)
        labels = rng.integers(0, 2, size)
        e = np.exp(1j * phi)
        plus = np.stack([np.ones(size), e], axis=1) / math.sqrt(2)
        minus = np.stack([np.ones(size), -e], axis=1) / math.sqrt(2)
        data = np.where(labels[:, None] == 0, plus, minus)
        return _batched_kron(data, *([plus] * scenario.n)), labels
    if scenario.kind == "um":
        cos_t = rng.uniform(-1.0, 1.0, size)
        phi = rng.uniform(0.0, 2 * np.pi, size)
        labels = rng.integers(0, 2, size)
        c = np.sqrt((1 + cos_t) / 2)
        s = np.sqrt((1 - cos_t) / 2)
        e = np.exp(1j * phi)
        plus = np.stack([c, e * s], axis=1)
        minus = np.stack([s, -e * c], axis=1)
        data = np.where(labels[:, None] == 0, plus, minus)
        return _batched_kron(data, plus, minus), labels
    d = scenario.d
    u = qd.haar_unitary(d, rng, size=size)
    labels = rng.integers(0, d, size)
    data = u[np.arange(size), :, labels]
    return _batched_kron(data, *(u[:, :, i] for i in range(d))), labels


def born_probabilities(povm: Povm, kets: np.ndarray) -> np.ndarray:
    """Outcome probabilities ``<Ψ|Π_l|Ψ>`` per row, with round-off dust clamped."""
    probs = np.stack([np.einsum("bi,bi->b", kets.conj(), kets @ op.T).real for _, op in povm.elements], axis=1)
    sums = probs.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > DUST_TOL:
        raise SamplingError(f"outcome probabilities sum to {sums.min():.3g}..{sums.max():.3g}")
    worst = probs.min()
    if worst < -DUST_TOL:
        bad = int(np.argmin(probs.min(axis=1)))
        raise SamplingError(f"negative outcome probability {worst:.3g}; row {bad}: {probs[bad].tolist()}")
    probs = np.where(np.abs(probs) <= DUST_TOL, 0.0, probs)
    return probs / probs.sum(axis=1, keepdims=True)


def _run_block(scenario: Scenario, povm: Povm, seed: int, block: int, size: int) -> np.ndarray:
    """Joint histogram ``[prepared_label, outcome]`` for one block."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    kets, labels = _draw_states(scenario, rng, size)
    u = rng.random(size)
    probs = born_probabilities(povm, kets)
    cum = np.cumsum(probs, axis=1)
    # Scaling u by the row total keeps zero-probability outcomes unreachable.
    outcomes = (u[:, None] * cum[:, -1:] >= cum).sum(axis=1)
    n_prepared = 2 if scenario.kind != "qd" else scenario.d
    hist = np.zeros((n_prepared, len(povm.elements)), dtype=np.int64)
    np.add.at(hist, (labels, outcomes), 1)
    return hist


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def _prepared_labels(scenario: Scenario) -> list[str]:
    if scenario.kind == "qd":
        return [qd.outcome_label(j) for j in range(1, scenario.d + 1)]
    return [PLUS, MINUS]


def simulate(config: SimConfig, threads: int | None = None) -> SimReport:
    """Run ``config.trials`` Born-rule trials and tally outcomes."""
    scenario = config.scenario
    povm, (p_s, p_i, p_e) = scenario.build()
    threads = threads or default_threads()
    n_blocks = -(-config.trials // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, config.trials - b * BLOCK_SIZE) for b in range(n_blocks)]

    def work(b: int) -> np.ndarray:
        return _run_block(scenario, povm, config.seed, b, sizes[b])

    if threads == 1 or n_blocks == 1:
        hists = [work(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hists = list(pool.map(work, range(n_blocks)))
    hist = sum(hists)

    outcome_labels = list(povm.labels)
    prepared = _prepared_labels(scenario)
    counts = {label: int(hist[:, i].sum()) for i, label in enumerate(outcome_labels)}
    successes = sum(int(hist[r, outcome_labels.index(label)]) for r, label in enumerate(prepared))
    inconclusive = counts.get(INCONCLUSIVE, 0)
    errors = config.trials - successes - inconclusive
    return SimReport(
        scenario=scenario.describe(),
        trials=config.trials,
        seed=config.seed,
        counts=counts,
        successes=successes,
        inconclusive=inconclusive,
        errors=errors,
        analytic_reference={"p_success": p_s, "p_inconclusive": p_i, "p_error": p_e},
    )
