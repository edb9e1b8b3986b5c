"""Binary symplectic linear algebra over GF(2), plus a QR-based left inverse.

Vectors and matrices are numpy ``uint8`` arrays holding 0/1. A Pauli operator
on n qubits is a length-2n vector ``(x | z)``: ``x[i] = 1`` means an X factor
on qubit i, ``z[i] = 1`` a Z factor, both set means Y. ``pack``/``unpack``
convert to byte-packed storage for files and hashing.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ContractViolation, NotDecomposable

RANK_TOL = 1e-9


def as_bits(a) -> np.ndarray:
    """Coerce to a uint8 0/1 array (values are reduced mod 2)."""
    return (np.asarray(a, dtype=np.int64) & 1).astype(np.uint8)


def _half(length: int) -> int:
    if length % 2:
        raise ContractViolation(f"symplectic vectors need even length, got {length}")
    return length // 2


def swap_halves(v: np.ndarray) -> np.ndarray:
    """Apply the block swap (x | z) -> (z | x) along the last axis."""
    v = np.asarray(v)
    n = _half(v.shape[-1])
    return np.concatenate([v[..., n:], v[..., :n]], axis=-1)


def swap_matrix(n: int) -> np.ndarray:
    """The 2n x 2n block-swap matrix."""
    lam = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    lam[:n, n:] = np.eye(n, dtype=np.uint8)
    lam[n:, :n] = np.eye(n, dtype=np.uint8)
    return lam


def symplectic_product(u, v) -> int | np.ndarray:
    """Commutation bit c(u, v): 0 if the Paulis commute, 1 otherwise.

    Broadcasts over leading axes.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape[-1] != v.shape[-1]:
        raise ContractViolation(f"length mismatch {u.shape[-1]} vs {v.shape[-1]}")
    n = _half(u.shape[-1])
    ui = u.astype(np.int64)
    vi = v.astype(np.int64)
    out = (ui[..., :n] * vi[..., n:]).sum(-1) + (ui[..., n:] * vi[..., :n]).sum(-1)
    out = out & 1
    return int(out) if np.ndim(out) == 0 else out.astype(np.uint8)


def symplectic_matrix(a, b) -> np.ndarray:
    """Pairwise commutation bits a Λ bᵀ for row stacks a (r x 2n) and b (s x 2n)."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    if a.shape[1] != b.shape[1]:
        raise ContractViolation(f"column mismatch {a.shape[1]} vs {b.shape[1]}")
    n = _half(a.shape[1])
    # integer matmul; counts stay far below overflow for any code we build
    ai = a.astype(np.int32)
    bi = b.astype(np.int32)
    m = ai[:, :n] @ bi[:, n:].T + ai[:, n:] @ bi[:, :n].T
    return (m & 1).astype(np.uint8)


def pauli_weight(v) -> int | np.ndarray:
    """Number of qubits on which the Pauli acts non-trivially."""
    v = np.asarray(v)
    n = _half(v.shape[-1])
    w = (v[..., :n] | v[..., n:]).astype(np.int64).sum(-1)
    return int(w) if np.ndim(w) == 0 else w


def hamming(v) -> int | np.ndarray:
    w = np.asarray(v).astype(np.int64).sum(-1)
    return int(w) if np.ndim(w) == 0 else w


def row_reduce(m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    r = as_bits(np.atleast_2d(m)).copy()
    rows, cols = r.shape
    pivots: list[int] = []
    i = 0
    for j in range(cols):
        if i == rows:
            break
        hits = np.nonzero(r[i:, j])[0]
        if hits.size == 0:
            continue
        p = i + hits[0]
        if p != i:
            r[[i, p]] = r[[p, i]]
        others = np.nonzero(r[:, j])[0]
        others = others[others != i]
        if others.size:
            r[others] ^= r[i]
        pivots.append(j)
        i += 1
    return r, pivots


def gf2_rank(m) -> tuple[int, np.ndarray]:
    """Rank over GF(2) together with the reduced row echelon form."""
    m = np.atleast_2d(np.asarray(m))
    if m.size == 0:
        return 0, as_bits(m)
    r, piv = row_reduce(m)
    return len(piv), r


def rank(m) -> int:
    return gf2_rank(m)[0]


def gf2_solve(m, b) -> np.ndarray | None:
    """Return one x with m x = b over GF(2), or None when inconsistent.

    Free variables are set to zero, so the answer is the particular solution
    read off the reduced system. A 2-D ``b`` is solved column by column in one
    elimination and returns None if any column is inconsistent.
    """
    m = as_bits(np.atleast_2d(m))
    b = as_bits(b)
    single = b.ndim == 1
    if single:
        b = b[:, None]
    if b.shape[0] != m.shape[0]:
        raise ContractViolation(f"rhs length {b.shape[0]} != rows {m.shape[0]}")
    cols = m.shape[1]
    r, piv = row_reduce(np.concatenate([m, b], axis=1))
    lead = [j for j in piv if j < cols]
    if len(lead) < len(piv):
        return None
    x = np.zeros((cols, b.shape[1]), dtype=np.uint8)
    for i, j in enumerate(lead):
        x[j] = r[i, cols:]
    return x[:, 0] if single else x


def nullspace(m) -> np.ndarray:
    """Basis (as rows) of {x : m x = 0} over GF(2)."""
    m = as_bits(np.atleast_2d(m))
    cols = m.shape[1]
    r, piv = row_reduce(m)
    free = [j for j in range(cols) if j not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for i, j in enumerate(piv):
            basis[t, j] = r[i, f]
    return basis


def in_rowspace(m, v) -> bool:
    m = np.atleast_2d(np.asarray(m))
    return rank(np.vstack([m, np.asarray(v)[None, :]])) == rank(m)


def pack(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis into bytes (little bit order), zero padded."""
    return np.packbits(as_bits(bits), axis=-1, bitorder="little")


def unpack(packed: np.ndarray, length: int) -> np.ndarray:
    return np.unpackbits(np.asarray(packed, dtype=np.uint8), axis=-1, count=length,
                         bitorder="little")


def qr_left_inverse(d) -> np.ndarray:
    """Left inverse R⁻¹Qᵀ of a tall real matrix via Householder QR.

    Raises NotDecomposable when the matrix is rank deficient, judged by the
    smallest diagonal entry of R falling below ``RANK_TOL``.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] < d.shape[1]:
        raise ContractViolation(f"need a tall matrix, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ContractViolation("non-finite entries")
    q, r = np.linalg.qr(d, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() < RANK_TOL:
        raise NotDecomposable(f"rank deficient: min |R_ii| = {diag.min():.3g}")
    return solve_triangular(r, q.T, lower=False)
