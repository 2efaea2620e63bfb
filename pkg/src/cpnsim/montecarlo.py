"""Frame-level Monte Carlo of direct detection and conditional pulse nulling.

Randomness is counter based: every uniform is a hash of
``(master_seed, receiver, word, frame, draw)``. A frame's record therefore
does not depend on how frames are batched or spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .photon import PERFECT_MATCH, DetectorModel, MismatchModel
from .receivers import (
    ERASURE,
    EXACT_NULLING,
    NullingStrategy,
    _cpn_slot_probs,
    _dd_slot_probs,
)

DD = "dd"
CPN = "cpn"
RECEIVERS = (DD, CPN)
_RECEIVER_IDS = {DD: 1, CPN: 2}

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _chain(key: np.ndarray, value) -> np.ndarray:
    with np.errstate(over="ignore"):
        return _splitmix64(key ^ np.asarray(value, dtype=np.uint64))


def frame_uniforms(
    master_seed: int, receiver: str, word: int, frames: np.ndarray, n_draws: int
) -> np.ndarray:
    """Uniforms in [0, 1), shape ``(len(frames), n_draws)``, keyed by frame index."""
    key = _splitmix64(np.array([master_seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
    key = _chain(key, _RECEIVER_IDS[receiver])
    key = _chain(key, word)
    per_frame = _chain(key, np.asarray(frames, dtype=np.uint64))
    draws = _chain(per_frame[:, None], np.arange(n_draws, dtype=np.uint64)[None, :])
    return (draws >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class TrialConfig:
    m: int = 4
    n_p: float = 1.0
    frames_per_word: int = 832
    master_seed: int = 0
    strategy: NullingStrategy = EXACT_NULLING
    detector: DetectorModel = field(default_factory=DetectorModel.ideal)
    mismatch: MismatchModel = PERFECT_MATCH
    receivers: tuple[str, ...] = RECEIVERS

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.frames_per_word < 1:
            raise ValueError("frames_per_word must be >= 1")
        unknown = set(self.receivers) - set(RECEIVERS)
        if unknown:
            raise ValueError(f"unknown receivers {sorted(unknown)}")


@dataclass(frozen=True)
class FrameRecord:
    true_word: int
    clicks: tuple[bool, ...]
    nulled: tuple[bool, ...]
    decision: int
    guess: int

    @property
    def erased(self) -> bool:
        return self.decision == ERASURE

    @property
    def hard_decision(self) -> int:
        """Decision with an erasure replaced by its uniform guess."""
        return self.guess if self.erased else self.decision


@dataclass(frozen=True)
class FrameBatch:
    """Vectorized records for many frames of one true word."""

    true_word: int
    clicks: np.ndarray
    nulled: np.ndarray
    decision: np.ndarray
    guess: np.ndarray

    def records(self) -> list[FrameRecord]:
        return [
            FrameRecord(
                self.true_word,
                tuple(bool(c) for c in self.clicks[f]),
                tuple(bool(c) for c in self.nulled[f]),
                int(self.decision[f]),
                int(self.guess[f]),
            )
            for f in range(len(self.decision))
        ]


def _pick_clicked(clicks: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Uniform choice among clicked slots (row-wise); -1 when nothing clicked."""
    count = clicks.sum(axis=1)
    rank = np.minimum((u * count).astype(np.int64), np.maximum(count - 1, 0))
    cum = np.cumsum(clicks, axis=1)
    hit = clicks & (cum == (rank + 1)[:, None])
    return np.where(count > 0, hit.argmax(axis=1), -1)


def simulate_dd_frames(true_word: int, cfg: TrialConfig, u: np.ndarray) -> FrameBatch:
    """Direct detection; ``u`` has ``M + 2`` uniforms per frame."""
    m = cfg.m
    q_sig, q_emp = _dd_slot_probs(cfg.n_p, cfg.detector)
    p = np.full(m, q_emp)
    p[true_word] = q_sig
    clicks = u[:, :m] < p
    decision = _pick_clicked(clicks, u[:, m])
    guess = np.minimum((u[:, m + 1] * m).astype(np.int64), m - 1)
    nulled = np.zeros_like(clicks)
    return FrameBatch(true_word, clicks, nulled, decision, guess)


def simulate_cpn_frames(true_word: int, cfg: TrialConfig, u: np.ndarray) -> FrameBatch:
    """Nulling receiver with slot-to-slot feedforward; ``M + 2`` uniforms per frame."""
    m = cfg.m
    n_frames = u.shape[0]
    n_null = cfg.strategy.null_photons(cfg.n_p)
    qn_sig, qn_emp, qd_sig, qd_emp = _cpn_slot_probs(cfg.n_p, n_null, cfg.detector, cfg.mismatch)
    clicks = np.zeros((n_frames, m), dtype=bool)
    nulled = np.zeros((n_frames, m), dtype=bool)
    hypothesis = np.full(n_frames, -1, dtype=np.int64)
    searching = np.ones(n_frames, dtype=bool)
    for s in range(m):
        present = s == true_word
        p = np.where(searching, qn_sig if present else qn_emp, qd_sig if present else qd_emp)
        nulled[:, s] = searching
        clicks[:, s] = u[:, s] < p
        settled = searching & ~clicks[:, s]
        hypothesis[settled] = s
        searching &= clicks[:, s]
    later = clicks & ~nulled
    decision = _pick_clicked(later, u[:, m])
    decision = np.where(decision >= 0, decision, hypothesis)
    guess = np.minimum((u[:, m + 1] * m).astype(np.int64), m - 1)
    return FrameBatch(true_word, clicks, nulled, decision, guess)


_SIMULATORS = {DD: simulate_dd_frames, CPN: simulate_cpn_frames}


def _single_frame(receiver: str, true_word: int, cfg: TrialConfig, rng: np.random.Generator) -> FrameRecord:
    if not 0 <= true_word < cfg.m:
        raise ValueError(f"true_word must be in [0, {cfg.m})")
    u = rng.random((1, cfg.m + 2))
    return _SIMULATORS[receiver](true_word, cfg, u).records()[0]


def simulate_dd_frame(true_word: int, cfg: TrialConfig, rng: np.random.Generator) -> FrameRecord:
    return _single_frame(DD, true_word, cfg, rng)


def simulate_cpn_frame(true_word: int, cfg: TrialConfig, rng: np.random.Generator) -> FrameRecord:
    return _single_frame(CPN, true_word, cfg, rng)


@dataclass(frozen=True)
class ErrorEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_events: int


def wilson_interval(events: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = norm.ppf(0.5 + 0.5 * confidence)
    p = events / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    low = 0.0 if events == 0 else max(0.0, centre - half)
    high = 1.0 if events == trials else min(1.0, centre + half)
    return low, high


def estimate(events: int, trials: int) -> ErrorEstimate:
    low, high = wilson_interval(events, trials)
    p = events / trials
    return ErrorEstimate(p, min(low, p), max(high, p), trials, events)


@dataclass(frozen=True)
class RateCounts:
    """Pooled outcome counts for one receiver; trials add by summing counts."""

    trials: int = 0
    correct: int = 0
    wrong: int = 0
    erased: int = 0
    hard_wrong: int = 0

    def __add__(self, other: "RateCounts") -> "RateCounts":
        return RateCounts(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self) -> tuple[int, ...]:
        return (self.trials, self.correct, self.wrong, self.erased, self.hard_wrong)

    @property
    def error(self) -> ErrorEstimate:
        """Wrong hard decisions; erasures are not counted."""
        return estimate(self.wrong, self.trials)

    @property
    def erasure(self) -> ErrorEstimate:
        return estimate(self.erased, self.trials)

    @property
    def hard_error(self) -> ErrorEstimate:
        """Word errors after replacing erasures by uniform guesses."""
        return estimate(self.hard_wrong, self.trials)


def count_batch(batch: FrameBatch) -> RateCounts:
    erased = batch.decision == ERASURE
    correct = batch.decision == batch.true_word
    hard = np.where(erased, batch.guess, batch.decision)
    return RateCounts(
        trials=len(batch.decision),
        correct=int(correct.sum()),
        wrong=int((~correct & ~erased).sum()),
        erased=int(erased.sum()),
        hard_wrong=int((hard != batch.true_word).sum()),
    )


def _run_chunk(args) -> dict[str, RateCounts]:
    cfg, word, start, stop, chunk = args
    out = {r: RateCounts() for r in cfg.receivers}
    for lo in range(start, stop, chunk):
        frames = np.arange(lo, min(stop, lo + chunk), dtype=np.uint64)
        for receiver in cfg.receivers:
            u = frame_uniforms(cfg.master_seed, receiver, word, frames, cfg.m + 2)
            out[receiver] = out[receiver] + count_batch(_SIMULATORS[receiver](word, cfg, u))
    return out


def run_counts(cfg: TrialConfig, workers: int = 1, chunk: int = 200_000) -> dict[str, RateCounts]:
    """Outcome counts over ``frames_per_word`` frames of every word."""
    lanes = max(1, workers)
    tasks = []
    for word in range(cfg.m):
        bounds = np.linspace(0, cfg.frames_per_word, lanes + 1).astype(int)
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b > a:
                tasks.append((cfg, word, int(a), int(b), chunk))
    if lanes == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=lanes) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    total = {r: RateCounts() for r in cfg.receivers}
    for part in parts:
        for r, c in part.items():
            total[r] = total[r] + c
    return total


def estimate_rates(cfg: TrialConfig, workers: int = 1) -> dict[str, dict[str, ErrorEstimate]]:
    """Per receiver: ``error``, ``erasure`` and ``hard_error`` estimates with Wilson 95% intervals."""
    return {
        r: {"error": c.error, "erasure": c.erasure, "hard_error": c.hard_error}
        for r, c in run_counts(cfg, workers).items()
    }
