"""Turning predicted diagnosis vectors into recoveries, Monte-Carlo logical
error rates, and exact small-code oracles (conditional class probabilities
and the L2-optimal diagnosis).

Pipeline for one syndrome s with prediction gᴾ:
    δ = H_g Λ t(s)ᵀ,   qᴾ = D⁻¹ (σ_δ(gᴾ); 1),   w* = argmax qᴾ,   r = w*G ⊕ t(s).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import binomtest

from .codes import StabilizerCode, class_index, class_vectors, pure_error, syndrome
from .diagnosis import DiagnosisScheme, faithful_columns, sigma
from .errors import ContractViolation, NotDecomposable, TooLarge, UnreachableSyndrome
from .noise import BLOCK, NoiseModel, log_prob, sample_errors
from .parallel import map_ranges

# class probabilities closer than this count as tied; ties go to the lowest class
TIE_TOL = 1e-9
EXACT_MAX_N = 13


def argmax_lowest(q, tol: float = TIE_TOL):
    """Row-wise argmax where near-ties resolve to the lowest index."""
    q = np.asarray(q, dtype=float)
    top = q.max(axis=-1, keepdims=True)
    return np.argmax(q >= top - tol, axis=-1)


@dataclass
class DecodeOutcome:
    recovery: np.ndarray
    chosen_class: int
    q: np.ndarray


def class_weights(scheme: DiagnosisScheme, s, g_pred) -> np.ndarray:
    """qᴾ for a batch of syndromes and predicted diagnosis vectors."""
    if not scheme.decomposable:
        raise NotDecomposable("decoding needs a decomposable scheme")
    s = np.atleast_2d(s)
    g_pred = np.atleast_2d(np.asarray(g_pred, dtype=float))
    if g_pred.shape[1] != scheme.rows:
        raise ContractViolation(f"prediction has {g_pred.shape[1]} entries, scheme has {scheme.rows}")
    delta = (s.astype(np.int64) @ scheme.delta_map.T.astype(np.int64)) & 1
    v = sigma(delta, g_pred)
    aug = np.concatenate([v, np.ones((v.shape[0], 1))], axis=1)
    return aug @ scheme.D_inv.T


def decode_labels(code: StabilizerCode, scheme: DiagnosisScheme, s, g_pred):
    """Batch decode: (recoveries, chosen classes, qᴾ)."""
    s = np.atleast_2d(s)
    q = class_weights(scheme, s, g_pred)
    cls = argmax_lowest(q)
    rec = class_vectors(code)[cls] ^ pure_error(code, s)
    return rec, cls, q


def decode_one(code: StabilizerCode, scheme: DiagnosisScheme, predictor, s) -> DecodeOutcome:
    s = np.asarray(s)
    g = np.asarray(predictor(s[None, :]), dtype=float)
    rec, cls, q = decode_labels(code, scheme, s[None, :], g.reshape(1, -1))
    return DecodeOutcome(rec[0], int(cls[0]), q[0])


def is_success(code: StabilizerCode, e, recovery) -> bool | np.ndarray:
    """e ⊕ r is a stabilizer: zero syndrome and trivial class."""
    e = np.asarray(e)
    r = np.asarray(recovery)
    if e.shape != r.shape:
        raise ContractViolation("error and recovery shapes differ")
    x = e ^ r
    ok = ~syndrome(code, np.atleast_2d(x)).any(axis=1) & (class_index(code, np.atleast_2d(x)) == 0)
    return bool(ok[0]) if e.ndim == 1 else ok


def wilson(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(failures), int(trials)).proportion_ci(confidence_level=level,
                                                            method="wilson")
    return float(ci.low), float(ci.high)


def rate_summary(failures: int, trials: int) -> dict:
    lo, hi = wilson(failures, trials)
    return {"rate": failures / trials, "ci_low": lo, "ci_high": hi,
            "failures": int(failures), "trials": int(trials)}


def simulate(code: StabilizerCode, model: NoiseModel, trials: int, seed: int, recover,
             threads: int | None = None, chunk: int = BLOCK) -> dict:
    """Monte-Carlo failure rate of ``recover(s_batch, start) -> recoveries``.

    Error i comes from (seed, i) regardless of worker count; chunks are
    summed in index order.
    """
    if trials < 1:
        raise ContractViolation("trials must be >= 1")

    def work(lo, hi):
        e = sample_errors(model, code.n, seed, lo, hi - lo)
        r = recover(syndrome(code, e), lo)
        return int((~is_success(code, e, r)).sum())

    failures = sum(map_ranges(work, trials, chunk, threads))
    return rate_summary(failures, trials)


def logical_error_rate(code: StabilizerCode, scheme: DiagnosisScheme, predictor,
                       model: NoiseModel, trials: int, seed: int,
                       threads: int | None = None) -> dict:
    def recover(s, _start):
        return decode_labels(code, scheme, s, predictor(s))[0]

    return simulate(code, model, trials, seed, recover, threads)


# ---------------------------------------------------------------- predictors

class NetworkPredictor:
    """Wraps a trained network; ``grid`` feeds the two-grid CNN layout."""

    def __init__(self, net, code: StabilizerCode, grid: bool = False):
        self.net, self.code, self.grid = net, code, grid

    def __call__(self, s):
        from . import nn
        s = np.atleast_2d(s)
        x = nn.syndrome_grids(self.code, s) if self.grid else s
        return nn.predict(self.net, x.astype(np.float64))


class ConstantPredictor:
    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)

    def __call__(self, s):
        return np.broadcast_to(self.value, (np.atleast_2d(s).shape[0], self.value.size)).copy()


class ExactL2Predictor:
    """The exact conditional-mean diagnosis, memoised per syndrome."""

    def __init__(self, code, scheme, model):
        self.code, self.scheme, self.model = code, scheme, model
        self.cache: dict[bytes, np.ndarray] = {}

    def __call__(self, s):
        s = np.atleast_2d(s)
        out = np.empty((s.shape[0], self.scheme.rows))
        for i, row in enumerate(s):
            key = row.tobytes()
            if key not in self.cache:
                self.cache[key] = exact_l2_diagnosis(self.code, self.scheme, self.model, row)
            out[i] = self.cache[key]
        return out


# ---------------------------------------------------------------- exact oracles

@lru_cache(maxsize=8)
def _stabilizer_group(code: StabilizerCode) -> np.ndarray:
    r = code.num_checks
    coeffs = ((np.arange(2 ** r)[:, None] >> np.arange(r)) & 1).astype(np.int64)
    return ((coeffs @ code.checks.astype(np.int64)) & 1).astype(np.uint8)


def class_probabilities(code: StabilizerCode, model: NoiseModel, s) -> np.ndarray:
    """q_s(w) = Pr[class w | s] by summing every error t(s) ⊕ wG ⊕ stabilizer."""
    if code.n > EXACT_MAX_N:
        raise TooLarge(f"exact enumeration limited to n <= {EXACT_MAX_N}, got {code.n}")
    group = _stabilizer_group(code)
    base = pure_error(code, np.asarray(s))
    logp = np.stack([log_prob(model, group ^ (base ^ cv)[None, :]) for cv in class_vectors(code)])
    top = logp.max()
    if not np.isfinite(top):
        raise UnreachableSyndrome("syndrome has probability zero under the model")
    w = np.exp(logp - top).sum(axis=1)
    return w / w.sum()


def exact_optimal_class(code: StabilizerCode, model: NoiseModel, s) -> int:
    return int(argmax_lowest(class_probabilities(code, model, s)))


def exact_l2_diagnosis(code: StabilizerCode, scheme: DiagnosisScheme, model: NoiseModel,
                       s) -> np.ndarray:
    """Σ_w q_s(w) g_s(w): the minimiser of the expected squared L2 loss given s."""
    q = class_probabilities(code, model, s)
    cols = faithful_columns(code, scheme.H_g, s).astype(float)
    return q @ cols
