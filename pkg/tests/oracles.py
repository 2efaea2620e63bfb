"""Independent reference computations used as test oracles.

Nothing here imports cpnsim internals: click probabilities are re-derived from
scratch and receivers are evaluated by brute force over every click record.
"""
from __future__ import annotations

import itertools
import math

import mpmath as mp
import numpy as np


def slot_click(mean: float, bg: float = 0.0) -> float:
    return 1.0 - math.exp(-mean) * (1.0 - bg)


def brute_dd(m: int, n_p: float, c_sig: float = 0.0) -> tuple[float, float, float]:
    """(hard error with guessing, wrong decisions, erasures) over all 2^M click patterns."""
    bg = c_sig * n_p
    hard = wrong = eras = 0.0
    for w in range(m):
        for pattern in itertools.product((0, 1), repeat=m):
            pr = 1.0
            for s, c in enumerate(pattern):
                q = slot_click(n_p if s == w else 0.0, bg)
                pr *= q if c else 1.0 - q
            clicked = [s for s, c in enumerate(pattern) if c]
            if not clicked:
                eras += pr / m
                hard += pr / m * (1 - 1 / m)
            else:
                p_ok = 1 / len(clicked) if w in clicked else 0.0
                wrong += pr / m * (1 - p_ok)
                hard += pr / m * (1 - p_ok)
    return hard, wrong, eras


def brute_cpn(
    m: int,
    n_p: float,
    n_null: float,
    delta: float = 0.0,
    c_sig: float = 0.0,
    c_null: float = 0.0,
) -> tuple[float, float]:
    """(wrong decisions, erasures) of the nulling receiver over all 2^M click vectors.

    For a full click vector the nulled slots are fixed by the feedforward rule
    (slot s nulled iff every earlier slot was nulled and clicked), so each
    vector is one record with a product probability.
    """

    def mean(present: bool, nulled: bool) -> float:
        if not nulled:
            return n_p if present else 0.0
        if not present:
            return n_null
        return (math.sqrt(n_p * (1 - delta)) - math.sqrt(n_null)) ** 2 + delta * n_p

    wrong = eras = 0.0
    for w in range(m):
        for pattern in itertools.product((0, 1), repeat=m):
            pr = 1.0
            searching = True
            hyp = None
            for s, c in enumerate(pattern):
                nulled = searching
                bg = c_sig * n_p + (c_null * n_null if nulled else 0.0)
                q = slot_click(mean(s == w, nulled), bg)
                pr *= q if c else 1.0 - q
                if searching and not c:
                    hyp = s
                    searching = False
            if hyp is None:
                eras += pr / m
                continue
            later = [s for s in range(hyp + 1, m) if pattern[s]]
            if later:
                p_ok = 1 / len(later) if w in later else 0.0
            else:
                p_ok = 1.0 if hyp == w else 0.0
            wrong += pr / m * (1 - p_ok)
    return wrong, eras


def ideal_cpn_closed_form(m: int, n_p: float) -> float:
    p = math.exp(-n_p)
    return p - (1 - (1 - p) ** m) / m


def gram_srm_error(m: int, n_p: float) -> float:
    """Square-root measurement error from an eigendecomposition of the Gram matrix."""
    s = math.exp(-n_p)
    gram = np.full((m, m), s) + (1 - s) * np.eye(m)
    vals, vecs = np.linalg.eigh(gram)
    root = vecs @ np.diag(np.sqrt(np.clip(vals, 0, None))) @ vecs.T
    return 1.0 - float(np.sum(np.diag(root) ** 2)) / m


def binary_gram_helstrom(alpha: float) -> float:
    """Helstrom error from the trace norm of the prior-weighted difference operator."""
    c = math.exp(-alpha * alpha / 2)
    # |0> and |alpha> written in a 2-d orthonormal basis
    psi0 = np.array([1.0, 0.0])
    psi1 = np.array([c, math.sqrt(1 - c * c)])
    gamma = 0.5 * np.outer(psi0, psi0) - 0.5 * np.outer(psi1, psi1)
    return 0.5 * (1 - float(np.abs(np.linalg.eigvalsh(gamma)).sum()))


def rs_exhaustive(n: int, k: int, p_err: float, p_eras: float, dps: int = 50) -> mp.mpf:
    """Direct (t, e) trinomial sum in extended precision."""
    with mp.workdps(dps):
        d = n - k + 1
        pe, pr = mp.mpf(p_err), mp.mpf(p_eras)
        pc = 1 - pe - pr
        total = mp.mpf(0)
        for t in range(n + 1):
            for e in range(n - t + 1):
                if 2 * t + e >= d:
                    coeff = mp.factorial(n) / (mp.factorial(t) * mp.factorial(e) * mp.factorial(n - t - e))
                    total += coeff * pe**t * pr**e * pc ** (n - t - e)
        return +total


def erasure_tail(n: int, d: int, p_eras: float, dps: int = 50) -> mp.mpf:
    with mp.workdps(dps):
        q = mp.mpf(p_eras)
        return mp.fsum(mp.binomial(n, e) * q**e * (1 - q) ** (n - e) for e in range(d, n + 1))


def mutual_information_bits(m: int, p_err: float, p_eras: float) -> float:
    """I(X;Y) from the explicit M x (M+1) transition matrix and uniform inputs."""
    trans = np.zeros((m, m + 1))
    for x in range(m):
        trans[x, :m] = p_err / (m - 1)
        trans[x, x] = 1 - p_err - p_eras
        trans[x, m] = p_eras
    px = np.full(m, 1 / m)
    py = px @ trans
    total = 0.0
    for x in range(m):
        for y in range(m + 1):
            if trans[x, y] > 0:
                total += px[x] * trans[x, y] * math.log2(trans[x, y] / py[y])
    return total
