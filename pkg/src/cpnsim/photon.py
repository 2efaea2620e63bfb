"""Click statistics of displaced coherent states seen by an on/off single photon detector.

Every higher layer (analytic receivers, Monte Carlo) reads detector behaviour
only through :func:`click_probability` and :func:`effective_mean_photons`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_C_SIG = 0.0042
DEFAULT_C_NULL = 0.0129

INCOHERENT_FRACTION = "incoherent_fraction"
VISIBILITY = "visibility"
INTERFERENCE_MODELS = (INCOHERENT_FRACTION, VISIBILITY)


def _check_nonneg(name: str, value) -> None:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr) & (arr >= 0.0)):
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class CoherentAmplitude:
    """Real amplitude of a coherent pulse; the mean photon number is its square."""

    amplitude: float

    @classmethod
    def from_photons(cls, mean_photons: float) -> "CoherentAmplitude":
        _check_nonneg("mean_photons", mean_photons)
        return cls(math.sqrt(mean_photons))

    @property
    def mean_photons(self) -> float:
        return self.amplitude * self.amplitude


@dataclass(frozen=True)
class DetectorModel:
    """Detector efficiency plus per-slot leakage/dark click coefficients.

    The background click probability in a slot is
    ``c_dark + c_sig * N_p + c_null * N_null`` (clamped below 1), where ``N_p``
    is the frame's signal pulse energy and ``N_null`` the nulling pulse energy
    sent into that slot.
    """

    eta: float = 1.0
    c_sig: float = DEFAULT_C_SIG
    c_null: float = DEFAULT_C_NULL
    c_dark: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        for name in ("c_sig", "c_null", "c_dark"):
            _check_nonneg(name, getattr(self, name))

    @classmethod
    def ideal(cls, eta: float = 1.0) -> "DetectorModel":
        return cls(eta=eta, c_sig=0.0, c_null=0.0, c_dark=0.0)

    @property
    def is_noiseless(self) -> bool:
        return self.c_sig == 0.0 and self.c_null == 0.0 and self.c_dark == 0.0

    def background(self, n_p_incident, n_null_incident=0.0):
        p = self.c_dark + self.c_sig * np.asarray(n_p_incident) + self.c_null * np.asarray(n_null_incident)
        # clamp into [0, 1); a certain background click would make every record identical
        return _out(np.minimum(p, math.nextafter(1.0, 0.0)))


@dataclass(frozen=True)
class MismatchModel:
    """Imperfect signal/null interference: fractional mode mismatch and phase offset.

    ``model`` selects how partially interfering power is treated away from the
    exact-nulling point. ``incoherent_fraction`` (default) splits the signal
    into an interfering part ``(1 - delta) N_p`` and a non-interfering part
    ``delta N_p``; ``visibility`` keeps full power but scales the interference
    cross term by ``1 - delta/2``. Both leave ``delta * N_p`` behind under
    exact nulling.
    """

    delta_m: float = 0.0
    theta: float = 0.0
    model: str = INCOHERENT_FRACTION

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta_m <= 1.0:
            raise ValueError(f"delta_m must lie in [0, 1], got {self.delta_m!r}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if self.model not in INTERFERENCE_MODELS:
            raise ValueError(f"unknown interference model {self.model!r}")
        if self.delta > 1.0:
            raise ValueError(f"effective mismatch {self.delta:.6g} exceeds 1")

    @classmethod
    def from_delta(cls, delta: float, model: str = INCOHERENT_FRACTION) -> "MismatchModel":
        """Lump all mismatch into the mode term (the fitted quantity is the sum)."""
        return cls(delta_m=delta, theta=0.0, model=model)

    @property
    def delta_theta(self) -> float:
        return 2.0 * (1.0 - math.cos(self.theta))

    @property
    def delta(self) -> float:
        return self.delta_m + self.delta_theta


PERFECT_MATCH = MismatchModel()


def click_probability(
    mean_photons_at_detector,
    detector: DetectorModel,
    n_p_incident=0.0,
    n_null_incident=0.0,
):
    """Probability of at least one click in a slot.

    Poisson clicks from the light reaching the detector and leakage clicks are
    independent, so their no-click probabilities multiply. Accepts scalars or
    broadcastable arrays.
    """
    _check_nonneg("mean_photons_at_detector", mean_photons_at_detector)
    _check_nonneg("n_p_incident", n_p_incident)
    _check_nonneg("n_null_incident", n_null_incident)
    p_bg = detector.background(n_p_incident, n_null_incident)
    signal = -np.expm1(-detector.eta * np.asarray(mean_photons_at_detector, dtype=float))
    return _out(signal * (1.0 - p_bg) + p_bg)


def effective_mean_photons(
    signal_present: bool,
    n_p,
    n_null,
    mismatch: MismatchModel = PERFECT_MATCH,
):
    """Mean photon number reaching the detector after nulling a slot.

    With no signal in the slot the nulling pulse passes straight through.
    """
    _check_nonneg("n_p", n_p)
    _check_nonneg("n_null", n_null)
    n_p = np.asarray(n_p, dtype=float)
    n_null = np.asarray(n_null, dtype=float)
    if not signal_present:
        return _out(n_null + 0.0 * n_p)
    delta = mismatch.delta
    if mismatch.model == VISIBILITY:
        cross = 2.0 * np.sqrt(n_p * n_null) * (1.0 - 0.5 * delta)
        return _out(np.maximum(n_p + n_null - cross, 0.0))
    residual = np.sqrt(n_p * (1.0 - delta)) - np.sqrt(n_null)
    return _out(residual * residual + delta * n_p)


def coherent_overlap(a: CoherentAmplitude | float, b: CoherentAmplitude | float) -> float:
    """Inner product <a|b> of two real-amplitude coherent states."""
    a = a.amplitude if isinstance(a, CoherentAmplitude) else float(a)
    b = b.amplitude if isinstance(b, CoherentAmplitude) else float(b)
    return math.exp(-0.5 * (a - b) ** 2)
