"""Diagnosis matrices: construction, the faithful/decomposable tests, and the
sensitivity metrics (m, M, N) used to compare constructions.

A diagnosis matrix H_g labels an error e with g = H_g Λ eᵀ. For a faithful
H_g the label depends only on the syndrome and the class, so there are four
candidate labels g_s(w) per syndrome. Stacking them with a row of ones gives
the real matrix D whose left inverse turns a predicted label into class
weights.
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

from . import gf2
from .codes import (COLOR, SURFACE, StabilizerCode, class_vectors, min_weight_logical)
from .errors import ContractViolation, NotDecomposable, UnsupportedFamily
from .minweight import PAULI_X, MinWeightSearch

CLASS_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))
# exact weight-ordered search for short-construction representatives is used up
# to this many qubits; larger codes take the canonical line representatives
EXACT_SHORT_MAX_N = 41


@dataclass(eq=False)
class DiagnosisScheme:
    code: StabilizerCode
    H_g: np.ndarray
    name: str = "custom"
    D: np.ndarray = field(init=False)
    D_inv: np.ndarray | None = field(init=False)
    delta_map: np.ndarray = field(init=False)
    class_order: tuple = CLASS_ORDER

    def __post_init__(self):
        self.H_g = gf2.as_bits(np.atleast_2d(self.H_g))
        if self.H_g.shape[1] != 2 * self.code.n:
            raise ContractViolation(f"H_g has {self.H_g.shape[1]} columns, need {2 * self.code.n}")
        cols = faithful_columns(self.code, self.H_g)
        self.D = np.vstack([cols.T.astype(float), np.ones((1, 4))])
        self.D_inv = _left_inverse_or_none(self.D)
        # δ(s) = H_g Λ t(s)ᵀ is linear in s
        self.delta_map = gf2.symplectic_matrix(self.H_g, self.code.pure_error_map.T)

    @property
    def rows(self) -> int:
        return self.H_g.shape[0]

    @property
    def decomposable(self) -> bool:
        return self.D_inv is not None

    def scheme_id(self) -> str:
        return hashlib.sha256(gf2.pack(self.H_g).tobytes()
                              + str(self.H_g.shape).encode()).hexdigest()[:16]

    def metrics(self) -> dict:
        return {
            "m": sensitivity(self.H_g),
            "M": boundary_distance(self),
            "N": normalized_sensitivity(self),
        }


def build_scheme(code: StabilizerCode, kind: str) -> DiagnosisScheme:
    if kind == "uniform":
        return DiagnosisScheme(code, uniform_construction(code), "uniform")
    if kind == "short":
        return DiagnosisScheme(code, short_construction(code), "short")
    raise ContractViolation(f"unknown scheme kind {kind!r}")


# ---------------------------------------------------------------- predicates

def is_faithful(code: StabilizerCode, H_g) -> bool:
    H_g = np.atleast_2d(np.asarray(H_g))
    if H_g.shape[1] != 2 * code.n:
        raise ContractViolation("H_g column count must be 2n")
    if gf2.symplectic_matrix(H_g, code.checks).any():
        return False
    return gf2.rank(np.vstack([code.checks, H_g])) == code.n + code.k


def is_decomposable(code: StabilizerCode, H_g) -> bool:
    if not is_faithful(code, H_g):
        return False
    cols = faithful_columns(code, H_g)
    D = np.vstack([cols.T.astype(float), np.ones((1, 4))])
    return _left_inverse_or_none(D) is not None


def _left_inverse_or_none(D):
    # fewer than three label rows can never separate four classes
    if D.shape[0] < D.shape[1]:
        return None
    try:
        return gf2.qr_left_inverse(D)
    except NotDecomposable:
        return None


def faithful_columns(code: StabilizerCode, H_g, s=None) -> np.ndarray:
    """The four labels g_s(w), one row per class in class order."""
    base = class_vectors(code)
    if s is not None:
        from .codes import pure_error
        base = base ^ pure_error(code, np.asarray(s))[None, :]
    return gf2.symplectic_matrix(base, np.atleast_2d(H_g))


def diagnosis_of(scheme: DiagnosisScheme, e) -> np.ndarray:
    e = np.asarray(e)
    if e.shape[-1] != 2 * scheme.code.n:
        raise ContractViolation("error length does not match the code")
    g = gf2.symplectic_matrix(np.atleast_2d(e), scheme.H_g)
    return g[0] if e.ndim == 1 else g


def sigma(delta, v):
    """(σ_δ(v))_i = δ_i + (-1)^δ_i v_i; an affine involutive isometry."""
    delta = np.asarray(delta, dtype=float)
    return delta + (1.0 - 2.0 * delta) * np.asarray(v, dtype=float)


# ---------------------------------------------------------------- metrics

def sensitivity(H) -> int:
    """Largest label change caused by flipping one bit of e: max column weight of HΛ."""
    H = np.atleast_2d(np.asarray(H))
    if H.size == 0:
        return 0
    cols = gf2.swap_halves(H).astype(np.int64).sum(0)
    return int(cols.max())


def _distance_to_hull(x, anchor, others):
    basis = np.stack([o - anchor for o in others], axis=1)
    y = x - anchor
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    r = y - basis @ coef
    return float(r @ r)


def _distance_to_span(x, vectors):
    basis = np.stack(vectors, axis=1)
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    r = x - basis @ coef
    return float(r @ r)


def boundary_distance(scheme: DiagnosisScheme, constrained: bool = True) -> float:
    """Smallest squared distance from a label g(w) to a class decision boundary.

    For each ordered pair (w, w') the boundary is spanned by the midpoint of
    g(w), g(w') and the remaining labels. With ``constrained`` the
    combination is affine (coefficients summing to one, which is what the
    extraction through D⁻¹ enforces); otherwise any linear combination.
    """
    if not scheme.decomposable:
        raise NotDecomposable("boundary distance needs a decomposable scheme")
    g = scheme.D[:-1].T          # (4, |g|)
    best = np.inf
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            rest = [g[c] for c in range(4) if c not in (a, b)]
            if constrained:
                mid = 0.5 * (g[a] + g[b])
                dist = _distance_to_hull(g[a], mid, rest)
            else:
                dist = _distance_to_span(g[a], [g[a] + g[b]] + rest)
            best = min(best, dist)
    return best


def normalized_sensitivity(scheme: DiagnosisScheme) -> float:
    return sensitivity(scheme.H_g) / boundary_distance(scheme)


def lower_bound(code: StabilizerCode) -> float:
    """2d/n, the floor on N for any faithful scheme."""
    return 2 * code.d / code.n


def analyze(scheme: DiagnosisScheme) -> dict:
    code = scheme.code
    out = {
        "family": code.family, "d": code.d, "scheme": scheme.name,
        "faithful": is_faithful(code, scheme.H_g),
        "decomposable": scheme.decomposable,
        "row_count": scheme.rows,
        "lower_bound_2d_over_n": lower_bound(code),
    }
    if scheme.decomposable:
        out.update(m=sensitivity(scheme.H_g), M=boundary_distance(scheme),
                   M_unconstrained=boundary_distance(scheme, constrained=False))
        out["N"] = out["m"] / out["M"]
    else:
        out.update(m=sensitivity(scheme.H_g), M=None, M_unconstrained=None, N=None)
    return out


# ---------------------------------------------------------------- constructions

def _xrow(n, support):
    v = np.zeros(2 * n, dtype=np.uint8)
    v[np.asarray(support, dtype=int)] = 1
    return v


def _zrow(n, support):
    v = np.zeros(2 * n, dtype=np.uint8)
    v[n + np.asarray(support, dtype=int)] = 1
    return v


def short_construction(code: StabilizerCode) -> np.ndarray:
    """Three rows: a lightest representative of classes 01, 10 and 11."""
    if code.k != 1:
        raise ContractViolation("short construction is defined for one logical qubit")
    if code.n <= EXACT_SHORT_MAX_N:
        bound = 2 * code.d
        return np.array([min_weight_logical(code, c, bound) for c in (1, 2, 3)])
    g = code.logicals
    if code.family in COLOR:
        y = g[0] | g[1]          # X and Z on the same boundary string
    else:
        y = g[0] ^ g[1]          # crossing lines, Y where they meet
    return np.array([g[1], g[0], y], dtype=np.uint8)


def uniform_construction(code: StabilizerCode) -> np.ndarray:
    """Line logicals spread evenly over the lattice.

    Surface codes: every Z-type line, every X-type line, then the products of
    the i-th lines of both kinds (3d rows). Color codes: parallel lines swept
    from each boundary (and, for 4.8.8, from the long side back), each line
    contributing X-, Z- and Y-type rows.
    """
    n = code.n
    if code.family in SURFACE:
        zs = [_zrow(n, l) for l in code.z_lines]
        xs = [_xrow(n, l) for l in code.x_lines]
        ys = [x ^ z for x, z in zip(xs, zs)]
        return np.array(zs + xs + ys, dtype=np.uint8)
    if code.family in COLOR:
        rows = []
        for pattern in color_line_patterns(code):
            for line in pattern:
                rows += [_xrow(n, line), _zrow(n, line), _xrow(n, line) | _zrow(n, line)]
        return np.array(rows, dtype=np.uint8)
    raise UnsupportedFamily(code.family)


def color_line_patterns(code: StabilizerCode) -> list[list[np.ndarray]]:
    """(d+1)/2 lightest logical lines per pattern, one pattern per origin.

    Origins are the three sides (plus, for 4.8.8, the qubits farthest from the
    third side). Two odd logicals always share an odd number of qubits, so the
    lines cannot be disjoint; instead the selection caps how many lines pass
    through any qubit at the number of patterns. Among all selections meeting
    the cap, the one keeping each pattern's lines closest to its origin is
    taken (a small integer program over all minimum-weight lines).
    """
    return [list(p) for p in _color_patterns(code.family, code.d)]


@lru_cache(maxsize=None)
def _color_patterns(family: str, d: int):
    from .codes import build_code
    code = build_code(family, d)
    origins = [list(s) for s in code.sides]
    if family == "color_488":
        origins.append(_opposite_corner_line(code))
    cands = _minimum_lines(code)
    adj = _qubit_graph(code)
    dists = [_bfs(adj, o) for o in origins]
    chosen = _select_lines(code.n, cands, dists, (d + 1) // 2, cap=len(origins))
    return tuple(tuple(cands[j] for j in picks) for picks in chosen)


def _face_matrix(code):
    faces_mat = np.zeros((len(code.faces), code.n), dtype=np.uint8)
    for i, f in enumerate(code.faces):
        faces_mat[i, f] = 1
    return faces_mat


def _minimum_lines(code) -> list[np.ndarray]:
    """Every minimum-weight X-type logical (odd weight, commutes with all faces)."""
    faces_mat = _face_matrix(code)
    n = code.n
    rows = np.zeros((faces_mat.shape[0] + 1, 2 * n), dtype=np.uint8)
    rows[:-1, n:] = faces_mat
    rows[-1, n:] = 1
    search = MinWeightSearch(rows, n, allowed=(PAULI_X,))
    _, sols = search.solutions(1 << faces_mat.shape[0], code.d)
    return [np.array(sorted(q for q, _ in sol)) for sol in next(iter(sols.values()))]


def _select_lines(n, cands, dists, count, cap):
    """Pick ``count`` candidates per pattern with at most ``cap`` lines per qubit,
    minimising the summed distance of each pattern's lines to its origin."""
    P, C = len(dists), len(cands)
    nv = P * C
    cost = np.array([dists[p][l].sum() for p in range(P) for l in cands], dtype=float)
    a = lil_matrix((P + n + C, nv))
    for p in range(P):
        for j, l in enumerate(cands):
            v = p * C + j
            a[p, v] = 1
            for q in l:
                a[P + q, v] = 1
            a[P + n + j, v] = 1
    # a line may serve several patterns only when there are too few lines to go round
    reuse = 1 if C >= P * count else P
    lb = np.r_[np.full(P, count), np.zeros(n), np.zeros(C)]
    ub = np.r_[np.full(P, count), np.full(n, cap), np.full(C, reuse)]
    res = milp(cost, constraints=LinearConstraint(a.tocsr(), lb, ub),
               integrality=np.ones(nv), bounds=Bounds(0, 1))
    if res.x is None:
        raise RuntimeError(f"no line selection within load {cap}: {res.message}")
    x = np.round(res.x).astype(int).reshape(P, C)
    return [sorted(np.nonzero(x[p])[0], key=lambda j: (dists[p][cands[j]].sum(), j))
            for p in range(P)]


def _qubit_graph(code):
    adj = [set() for _ in range(code.n)]
    for f in code.faces:
        for a in f:
            adj[a].update(f)
    for a in range(code.n):
        adj[a].discard(a)
    return adj


def _bfs(adj, start):
    dist = np.full(len(adj), -1)
    dq = deque()
    for s in start:
        dist[s] = 0
        dq.append(s)
    while dq:
        u = dq.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                dq.append(v)
    return dist


def _opposite_corner_line(code):
    # the qubits farthest from the third side seed the fourth pattern
    dist = _bfs(_qubit_graph(code), code.sides[2])
    return list(np.nonzero(dist == dist.max())[0])
