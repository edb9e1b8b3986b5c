"""I.i.d. Pauli noise: reproducible sampling and log-probabilities.

Sampling is counter based. Samples are grouped in fixed blocks of
``BLOCK`` indices; block b draws from a Philox stream keyed by (seed, b).
Sample i therefore depends only on (model, n, seed, i), whatever range or
worker produced it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

BLOCK = 4096
KINDS = ("bit_flip", "depolarizing")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown noise kind {self.kind!r}")
        if not (0.0 <= float(self.p) < 1.0):
            raise ContractViolation(f"p must lie in [0, 1), got {self.p}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p": float(self.p)}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        return cls(d["kind"], float(d["p"]))


def _block_uniforms(seed: int, block: int, n: int) -> np.ndarray:
    bitgen = np.random.Philox(np.random.SeedSequence([int(seed), int(block)]))
    return np.random.Generator(bitgen).random((BLOCK, n))


def _errors_from_uniforms(model: NoiseModel, u: np.ndarray) -> np.ndarray:
    p = model.p
    x = np.zeros(u.shape, dtype=np.uint8)
    z = np.zeros(u.shape, dtype=np.uint8)
    if model.kind == "bit_flip":
        x[u < p] = 1
    else:
        # [0, p/3) X, [p/3, 2p/3) Y, [2p/3, p) Z
        third = p / 3.0
        x[u < 2 * third] = 1
        z[(u >= third) & (u < p)] = 1
    return np.concatenate([x, z], axis=-1)


def sample_errors(model: NoiseModel, n: int, seed: int, start: int, count: int) -> np.ndarray:
    """Errors for sample indices start .. start+count-1, shape (count, 2n)."""
    if n < 1:
        raise ContractViolation("n must be positive")
    out = np.empty((count, 2 * n), dtype=np.uint8)
    if count == 0:
        return out
    stop = start + count
    pos = 0
    for b in range(start // BLOCK, (stop - 1) // BLOCK + 1):
        lo = max(start, b * BLOCK) - b * BLOCK
        hi = min(stop, (b + 1) * BLOCK) - b * BLOCK
        u = _block_uniforms(seed, b, n)[lo:hi]
        out[pos:pos + hi - lo] = _errors_from_uniforms(model, u)
        pos += hi - lo
    return out


def sample_error(model: NoiseModel, n: int, seed: int, index: int = 0) -> np.ndarray:
    return sample_errors(model, n, seed, index, 1)[0]


def log_prob(model: NoiseModel, e) -> float | np.ndarray:
    """log Pr[e] under the model; -inf for errors the model cannot produce."""
    e = np.asarray(e)
    if e.shape[-1] % 2:
        raise ContractViolation("error vector needs even length")
    n = e.shape[-1] // 2
    x = e[..., :n].astype(bool)
    z = e[..., n:].astype(bool)
    w = (x | z).sum(-1)
    p = model.p
    with np.errstate(divide="ignore"):
        if model.kind == "bit_flip":
            lp = w * _log(p) + (n - w) * math.log1p(-p)
            lp = np.where(z.any(-1), -np.inf, lp)
        else:
            lp = w * _log(p / 3.0) + (n - w) * math.log1p(-p)
    lp = np.where(w == 0, n * math.log1p(-p), lp)
    return float(lp) if np.ndim(lp) == 0 else lp


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def single_qubit_logp(model: NoiseModel) -> dict:
    """Log-probability of I, X, Y, Z on one qubit (keys 0..3 as in minweight)."""
    p = model.p
    if model.kind == "bit_flip":
        return {0: math.log1p(-p), 1: _log(p), 2: -math.inf, 3: -math.inf}
    return {0: math.log1p(-p), 1: _log(p / 3), 2: _log(p / 3), 3: _log(p / 3)}
