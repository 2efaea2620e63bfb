"""Exact outcome statistics for PPM and binary coherent-state receivers.

Words and slots are indexed from 0. A decision is either a word index or
:data:`ERASURE`. Outcome vectors have length ``M + 1`` with the erasure
probability stored last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .photon import (
    PERFECT_MATCH,
    CoherentAmplitude,
    DetectorModel,
    MismatchModel,
    click_probability,
    coherent_overlap,
    effective_mean_photons,
)

ERASURE = -1

EXACT = "exact"
FIXED_AMPLITUDE = "fixed_amplitude"

CLICK_MEANS_SIGNAL = "click_means_signal"
CLICK_MEANS_VACUUM = "click_means_vacuum"
GK_RULES = (CLICK_MEANS_SIGNAL, CLICK_MEANS_VACUUM)


def _check_order(m: int) -> None:
    if int(m) != m or m < 2:
        raise ValueError(f"PPM order must be an integer >= 2, got {m!r}")


@dataclass(frozen=True)
class PpmCodeword:
    order: int
    pulse_position: int

    def __post_init__(self) -> None:
        _check_order(self.order)
        if not 0 <= self.pulse_position < self.order:
            raise ValueError(f"pulse_position must be in [0, {self.order}), got {self.pulse_position}")

    def slot_photons(self, n_p: float) -> list[float]:
        return [n_p if s == self.pulse_position else 0.0 for s in range(self.order)]


@dataclass(frozen=True)
class NullingStrategy:
    """How much light the receiver sends into each nulled slot.

    ``exact`` always matches the pulse energy; ``fixed_amplitude`` uses
    ``n_null`` for every nulled stage.
    """

    mode: str = EXACT
    n_null: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in (EXACT, FIXED_AMPLITUDE):
            raise ValueError(f"unknown nulling mode {self.mode!r}")
        if not (self.n_null >= 0.0 and math.isfinite(self.n_null)):
            raise ValueError("n_null must be finite and >= 0")

    @classmethod
    def fixed(cls, n_null: float) -> "NullingStrategy":
        return cls(FIXED_AMPLITUDE, n_null)

    def null_photons(self, n_p):
        return n_p if self.mode == EXACT else self.n_null


EXACT_NULLING = NullingStrategy()


@dataclass(frozen=True)
class OutcomeDistribution:
    """Decision probabilities for one transmitted word."""

    true_word: int
    probabilities: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.probabilities) - 1

    def __getitem__(self, decision: int) -> float:
        if decision == ERASURE:
            return self.probabilities[-1]
        if not 0 <= decision < self.order:
            raise KeyError(decision)
        return self.probabilities[decision]

    @property
    def p_correct(self) -> float:
        return self.probabilities[self.true_word]

    @property
    def p_erasure(self) -> float:
        return self.probabilities[-1]

    @property
    def p_error(self) -> float:
        """Probability of a hard decision on a wrong word."""
        return sum(p for d, p in enumerate(self.probabilities[:-1]) if d != self.true_word)

    def total(self) -> float:
        return math.fsum(self.probabilities)


def hard_decision_error(p_err, p_eras, m: int):
    """Word error rate when every erasure is replaced by a uniform guess."""
    return p_err + (1.0 - 1.0 / m) * p_eras


def _average(dists: Sequence[OutcomeDistribution]) -> tuple[float, float]:
    m = len(dists)
    return (
        math.fsum(d.p_error for d in dists) / m,
        math.fsum(d.p_erasure for d in dists) / m,
    )


# --- direct detection -------------------------------------------------------


def _binom_pmf(n: int, j: int, q):
    return comb(n, j) * q**j * (1.0 - q) ** (n - j)


def _dd_slot_probs(n_p, detector: DetectorModel):
    signal = click_probability(n_p, detector, n_p, 0.0)
    empty = click_probability(0.0 * np.asarray(n_p), detector, n_p, 0.0)
    return signal, empty


def _dd_word_probs(m: int, w: int, q_sig, q_emp) -> list:
    # Empty slots are exchangeable: group click patterns by how many of them clicked.
    probs = [0.0] * (m + 1)
    ne = m - 1
    emp_share = 0.0
    for j in range(ne + 1):
        pmf = _binom_pmf(ne, j, q_emp)
        probs[w] = probs[w] + q_sig * pmf / (j + 1)
        if j == 0:
            probs[-1] = probs[-1] + (1.0 - q_sig) * pmf
        else:
            emp_share = emp_share + q_sig * pmf * j / (j + 1) + (1.0 - q_sig) * pmf
    for s in range(m):
        if s != w:
            probs[s] = emp_share / ne
    return probs


def dd_ppm_outcomes(m: int, n_p: float, detector: DetectorModel) -> list[OutcomeDistribution]:
    """Per-word outcomes of slot-by-slot photon counting.

    One click picks that slot, several clicks pick uniformly among them, and
    an empty record is an erasure.
    """
    _check_order(m)
    q_sig, q_emp = _dd_slot_probs(n_p, detector)
    return [
        OutcomeDistribution(w, tuple(float(p) for p in _dd_word_probs(m, w, q_sig, q_emp)))
        for w in range(m)
    ]


def dd_error_erasure(m: int, n_p: float, detector: DetectorModel) -> tuple[float, float]:
    return _average(dd_ppm_outcomes(m, n_p, detector))


def dd_ppm_error(m: int, n_p, detector: DetectorModel):
    """Average word error of ML direct detection, guessing uniformly on empty records."""
    _check_order(m)
    q_sig, q_emp = _dd_slot_probs(n_p, detector)
    # all words are equivalent for direct detection
    probs = _dd_word_probs(m, 0, q_sig, q_emp)
    return hard_decision_error(1.0 - probs[0] - probs[-1], probs[-1], m)


# --- conditional pulse nulling ----------------------------------------------


def _cpn_slot_probs(n_p, n_null, detector: DetectorModel, mismatch: MismatchModel):
    """Click probabilities for (nulled|dd) x (signal|empty) slots."""
    return (
        click_probability(effective_mean_photons(True, n_p, n_null, mismatch), detector, n_p, n_null),
        click_probability(effective_mean_photons(False, n_p, n_null, mismatch), detector, n_p, n_null),
        *_dd_slot_probs(n_p, detector),
    )


def _cpn_word_probs(m: int, w: int, qn_sig, qn_emp, qd_sig, qd_emp) -> list:
    """Walk the nulling tree for true word ``w``.

    Stage ``i`` nulls slot ``i``. A click rejects hypothesis ``i`` and moves on;
    no click switches to plain counting of the remaining slots, deciding ``i``
    unless some later slot clicks. Clicks at every stage give an erasure.
    """
    probs = [0.0] * (m + 1)
    reach = 1.0
    for i in range(m):
        q = qn_sig if i == w else qn_emp
        stay = reach * (1.0 - q)
        later = m - 1 - i
        if later == 0:
            probs[i] = probs[i] + stay
        elif w > i:
            ne = later - 1
            per_empty = 0.0
            for j in range(ne + 1):
                pmf = _binom_pmf(ne, j, qd_emp)
                probs[w] = probs[w] + stay * qd_sig * pmf / (j + 1)
                if j == 0:
                    probs[i] = probs[i] + stay * (1.0 - qd_sig) * pmf
                else:
                    per_empty = per_empty + stay * pmf * (qd_sig * j / (j + 1) + (1.0 - qd_sig)) / ne
            if ne:
                for s in range(i + 1, m):
                    if s != w:
                        probs[s] = probs[s] + per_empty
        else:
            none_click = (1.0 - qd_emp) ** later
            probs[i] = probs[i] + stay * none_click
            per_slot = stay * (1.0 - none_click) / later
            for s in range(i + 1, m):
                probs[s] = probs[s] + per_slot
        reach = reach * q
    probs[-1] = probs[-1] + reach
    return probs


def cpn_outcome_distribution(
    m: int,
    true_word: int,
    n_p: float,
    strategy: NullingStrategy = EXACT_NULLING,
    detector: DetectorModel | None = None,
    mismatch: MismatchModel = PERFECT_MATCH,
) -> OutcomeDistribution:
    _check_order(m)
    if not 0 <= true_word < m:
        raise ValueError(f"true_word must be in [0, {m}), got {true_word!r}")
    detector = DetectorModel.ideal() if detector is None else detector
    qs = _cpn_slot_probs(n_p, strategy.null_photons(n_p), detector, mismatch)
    return OutcomeDistribution(true_word, tuple(float(p) for p in _cpn_word_probs(m, true_word, *qs)))


def _cpn_rates(m: int, n_p, n_null, detector: DetectorModel, mismatch: MismatchModel):
    qs = _cpn_slot_probs(n_p, n_null, detector, mismatch)
    err = 0.0
    eras = 0.0
    for w in range(m):
        probs = _cpn_word_probs(m, w, *qs)
        eras = eras + probs[-1]
        err = err + (1.0 - probs[w] - probs[-1])
    return err / m, eras / m


def cpn_error(
    m: int,
    n_p: float,
    strategy: NullingStrategy = EXACT_NULLING,
    detector: DetectorModel | None = None,
    mismatch: MismatchModel = PERFECT_MATCH,
) -> tuple[float, float]:
    """Word-averaged (wrong decision, erasure) probabilities of the nulling receiver."""
    _check_order(m)
    detector = DetectorModel.ideal() if detector is None else detector
    err, eras = _cpn_rates(m, n_p, strategy.null_photons(n_p), detector, mismatch)
    return float(err), float(eras)


def cpn_hard_error(m, n_p, strategy=EXACT_NULLING, detector=None, mismatch=PERFECT_MATCH) -> float:
    return hard_decision_error(*cpn_error(m, n_p, strategy, detector, mismatch), m)


def _grid_refine(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    step: float,
    xtol: float,
    starts: int = 3,
) -> tuple[float, float]:
    """Dense grid, then bounded refinement around the best few grid points."""
    grid = np.arange(lo, hi + 0.5 * step, step)
    values = np.asarray(f(grid), dtype=float)
    best_x, best_v = float(grid[np.argmin(values)]), float(values.min())
    for idx in np.argsort(values, kind="stable")[:starts]:
        a = max(lo, grid[idx] - step)
        b = min(hi, grid[idx] + step)
        if b <= a:
            continue
        res = minimize_scalar(
            lambda x: float(f(np.array([x]))[0]),
            bounds=(a, b),
            method="bounded",
            options={"xatol": xtol},
        )
        if res.fun < best_v:
            best_x, best_v = float(res.x), float(res.fun)
    return best_x, best_v


def cpn_optimize_null(
    m: int,
    n_p: float,
    detector: DetectorModel | None = None,
    mismatch: MismatchModel = PERFECT_MATCH,
    step: float = 0.01,
    upper: float | None = None,
) -> tuple[float, float]:
    """Best single nulling energy for all stages.

    Minimizes the hard-decision word error (erasures guessed uniformly) over
    ``[0, upper]``, default ``upper = 4 N_p + 2``. Returns ``(n_null, error)``.
    """
    _check_order(m)
    detector = DetectorModel.ideal() if detector is None else detector
    upper = 4.0 * n_p + 2.0 if upper is None else upper

    def objective(n_null):
        return hard_decision_error(*_cpn_rates(m, n_p, n_null, detector, mismatch), m)

    return _grid_refine(objective, 0.0, upper, step, xtol=1e-4)


# --- binary on-off keying ---------------------------------------------------


def gk_error(alpha, beta, rule: str = CLICK_MEANS_SIGNAL):
    """Error of a displace-then-count receiver for equiprobable |0> and |alpha>.

    The alphabet is displaced to ``{|-beta>, |alpha - beta>}``. With
    ``click_means_signal`` a click selects ``|alpha>``; the other rule selects
    ``|0>`` on a click, which is the natural choice when ``beta`` is near
    ``alpha`` and the signal is nulled.
    """
    alpha = alpha.amplitude if isinstance(alpha, CoherentAmplitude) else alpha
    dark_signal = np.exp(-((alpha - beta) ** 2))
    dark_vacuum = np.exp(-(np.asarray(beta, dtype=float) ** 2))
    if rule == CLICK_MEANS_SIGNAL:
        p = 0.5 * (dark_signal + 1.0 - dark_vacuum)
    elif rule == CLICK_MEANS_VACUUM:
        p = 0.5 * (1.0 - dark_signal + dark_vacuum)
    else:
        raise ValueError(f"unknown decision rule {rule!r}")
    return float(p) if np.ndim(p) == 0 else p


@dataclass(frozen=True)
class GkOptimum:
    beta: float
    rule: str
    p_error: float


def gk_optimize(alpha, step: float = 0.005) -> GkOptimum:
    """Optimal displacement over both decision rules.

    The two rules have mirror-image optima at ``beta`` and ``alpha - beta``
    with equal error; ties go to ``click_means_signal``.
    """
    alpha = alpha.amplitude if isinstance(alpha, CoherentAmplitude) else float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    span = alpha + 6.0
    best: GkOptimum | None = None
    for rule in GK_RULES:
        beta, p = _grid_refine(lambda b: gk_error(alpha, b, rule), -span, span, step, xtol=1e-9)
        if best is None or p < best.p_error - 1e-12:
            best = GkOptimum(beta, rule, p)
    return best


def binary_helstrom(alpha) -> float:
    """Minimum error for equiprobable |0> vs |alpha>."""
    overlap_sq = coherent_overlap(0.0, alpha) ** 2
    return 0.5 * (1.0 - math.sqrt(1.0 - overlap_sq))


def ppm_helstrom(m: int, n_p: float) -> float:
    """Square-root-measurement error for equiprobable PPM words.

    PPM words form a geometrically uniform set with pairwise overlap
    ``s = exp(-N_p)``, so the SRM is optimal and its Gram matrix has
    eigenvalues ``1 + (M-1)s`` (once) and ``1 - s`` (M-1 times).
    """
    _check_order(m)
    s = math.exp(-n_p)
    a = math.sqrt(1.0 + (m - 1) * s)
    b = math.sqrt(-math.expm1(-n_p))
    # m - (a + (m-1) b) rearranged so no cancellation occurs at large N_p
    gap = m * (m - 1) * s * s / ((1.0 + a) * (1.0 + b) * (a + b))
    return gap * (2.0 * m - gap) / (m * m)


def improvement_db(p_ref: float, p_test: float) -> float:
    if not (0.0 < p_ref <= 1.0 and 0.0 < p_test <= 1.0):
        raise ValueError("error probabilities must lie in (0, 1]")
    return 10.0 * math.log10(p_ref / p_test)
