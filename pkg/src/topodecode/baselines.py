"""Reference decoders: exact minimum-distance (MD) search and minimum-weight
perfect matching (MWPM) for the surface codes, plus the full-error diagnosis
reconstruction used as a sanity fixture.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import gf2
from .codes import SURFACE, StabilizerCode
from .decode import simulate
from .errors import ContractViolation, TooManyDefects, UnsupportedFamily
from .minweight import PAULI_X, PAULI_Y, PAULI_Z, MinWeightSearch, pack_int
from .noise import NoiseModel

MATCHING_CAP = 20


# ---------------------------------------------------------------- MD

class MDDecoder:
    """Minimum-weight error consistent with s; ties go to the higher model
    probability, then to the lexicographically smallest vector.

    Only Paulis the model can produce are searched. Under bit-flip noise an
    error with a Z component always has an X part of at least the same
    weight and syndrome, so nothing optimal is lost.
    """

    def __init__(self, code: StabilizerCode, model: NoiseModel, max_weight: int | None = None):
        self.code = code
        self.model = model
        self.max_weight = code.n if max_weight is None else int(max_weight)
        allowed = (PAULI_X,) if model.kind == "bit_flip" else (PAULI_X, PAULI_Y, PAULI_Z)
        self.search = MinWeightSearch(code.checks, code.n, allowed)
        self.cache: dict[bytes, np.ndarray] = {}

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.uint8)
        if s.shape != (self.code.num_checks,):
            raise ContractViolation(f"syndrome length {s.shape} != {self.code.num_checks}")
        key = s.tobytes()
        hit = self.cache.get(key)
        if hit is None:
            hit = self._solve(pack_int(s))
            self.cache[key] = hit
        return hit.copy()

    def _solve(self, target: int) -> np.ndarray:
        _, sols = self.search.solutions(target, self.max_weight)
        vecs = [self.search.to_vector(sol) for sol in sols[target]]
        # i.i.d. models: equal weight means equal probability, so order lexicographically
        return min(vecs, key=lambda v: tuple(v.tolist()))

    def decode_batch(self, s) -> np.ndarray:
        return np.array([self(row) for row in np.atleast_2d(s)], dtype=np.uint8)


def md_decode(code: StabilizerCode, model: NoiseModel, s, max_weight: int | None = None):
    return MDDecoder(code, model, max_weight)(s)


# ---------------------------------------------------------------- MWPM

@dataclass
class MatchingGraph:
    """Checks of one type with qubits as edges; qubits touching a single
    check are edges to the boundary."""
    rows: np.ndarray          # check indices into code.checks
    dist: np.ndarray          # all-pairs shortest path lengths between these checks
    parent: np.ndarray        # parent[src, v] = (previous check, qubit) on a BFS tree
    boundary_cost: np.ndarray
    boundary_path: list       # qubits from each check out to the boundary
    flip_half: int            # 0: recovery is X-type, 1: Z-type


def _matching_graph(code: StabilizerCode, check_type: str) -> MatchingGraph:
    n = code.n
    rows = np.array([i for i, t in enumerate(code.stab_types) if t == check_type])
    # Z checks see X errors, so read the Z half of their rows
    half = slice(n, 2 * n) if check_type == "Z" else slice(0, n)
    inc = code.checks[rows][:, half]
    m = len(rows)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    edge_of_boundary: dict[int, list[int]] = {}
    for q in range(n):
        touch = np.nonzero(inc[:, q])[0]
        if len(touch) == 2:
            a, b = int(touch[0]), int(touch[1])
            adj[a].append((b, q))
            adj[b].append((a, q))
        elif len(touch) == 1:
            edge_of_boundary.setdefault(int(touch[0]), []).append(q)
        elif len(touch) > 2:
            raise UnsupportedFamily("matching needs each qubit in at most two checks of a type")
    dist = np.full((m, m), -1, dtype=np.int64)
    parent = np.full((m, m, 2), -1, dtype=np.int64)
    for src in range(m):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v, q in adj[u]:
                if dist[src, v] < 0:
                    dist[src, v] = dist[src, u] + 1
                    parent[src, v] = (u, q)
                    queue.append(v)
    bcost = np.zeros(m, dtype=np.int64)
    bpath = []
    for src in range(m):
        best = None
        for c, qs in sorted(edge_of_boundary.items()):
            if dist[src, c] < 0:
                continue
            cand = (int(dist[src, c]) + 1, c, min(qs))
            if best is None or cand < best:
                best = cand
        if best is None:
            raise UnsupportedFamily("a check has no path to the boundary")
        bcost[src] = best[0]
        bpath.append(_tree_path(parent, src, best[1]) + [best[2]])
    return MatchingGraph(rows, dist, parent, bcost, bpath, 0 if check_type == "Z" else 1)


def _tree_path(parent, src, dst) -> list[int]:
    qubits = []
    v = dst
    while v != src:
        u, q = parent[src, v]
        qubits.append(int(q))
        v = int(u)
    return qubits


@lru_cache(maxsize=16)
def _graphs(code: StabilizerCode):
    if code.family not in SURFACE:
        raise UnsupportedFamily("MWPM is provided for the surface codes only")
    return _matching_graph(code, "Z"), _matching_graph(code, "X")


def min_weight_matching(dist, bcost):
    """Exact matching of m defects, each paired with another or sent to the
    boundary. Returns (cost, pairs) where a pair (i, -1) is a boundary match.
    Subset DP over the lowest unmatched defect; ties keep the earliest option.
    """
    m = len(bcost)
    memo: dict[int, tuple[int, tuple]] = {0: (0, ())}

    def best(mask):
        if mask in memo:
            return memo[mask]
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        c, pairs = best(rest)
        out = (c + int(bcost[i]), ((i, -1),) + pairs)
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask ^= 1 << j
            c, pairs = best(rest ^ (1 << j))
            c += int(dist[i][j])
            if c < out[0]:
                out = (c, ((i, j),) + pairs)
        memo[mask] = out
        return out

    return best((1 << m) - 1)


def _match_type(graph: MatchingGraph, s_part, n: int, cap: int):
    defects = np.nonzero(s_part)[0]
    if len(defects) > cap:
        raise TooManyDefects(f"{len(defects)} defects exceed the matching cap {cap}")
    rec = np.zeros(n, dtype=np.uint8)
    if len(defects) == 0:
        return rec, 0
    sub = graph.dist[np.ix_(defects, defects)]
    if (sub < 0).any():
        raise UnsupportedFamily("disconnected defects")
    cost, pairs = min_weight_matching(sub, graph.boundary_cost[defects])
    for i, j in pairs:
        a = int(defects[i])
        path = graph.boundary_path[a] if j < 0 else _tree_path(graph.parent, a, int(defects[j]))
        for q in path:
            rec[q] ^= 1
    return rec, cost


def mwpm_decode(code: StabilizerCode, s, cap: int = MATCHING_CAP, with_costs: bool = False):
    """X and Z parts matched independently; recovery is the union of the paths."""
    s = np.asarray(s, dtype=np.uint8)
    if s.shape != (code.num_checks,):
        raise ContractViolation(f"syndrome length {s.shape} != {code.num_checks}")
    n = code.n
    out = np.zeros(2 * n, dtype=np.uint8)
    costs = []
    for g in _graphs(code):
        part, cost = _match_type(g, s[g.rows], n, cap)
        out[g.flip_half * n:(g.flip_half + 1) * n] ^= part
        costs.append(cost)
    return (out, tuple(costs)) if with_costs else out


class MWPMDecoder:
    def __init__(self, code: StabilizerCode, cap: int = MATCHING_CAP):
        _graphs(code)
        self.code, self.cap = code, cap
        self.cache: dict[bytes, np.ndarray] = {}

    def __call__(self, s):
        s = np.asarray(s, dtype=np.uint8)
        key = s.tobytes()
        if key not in self.cache:
            self.cache[key] = mwpm_decode(self.code, s, self.cap)
        return self.cache[key].copy()

    def decode_batch(self, s) -> np.ndarray:
        return np.array([self(row) for row in np.atleast_2d(s)], dtype=np.uint8)


def make_decoder(code: StabilizerCode, model: NoiseModel, name: str):
    if name == "md":
        return MDDecoder(code, model)
    if name == "mwpm":
        return MWPMDecoder(code)
    raise ContractViolation(f"unknown decoder {name!r}")


def baseline_error_rate(code: StabilizerCode, model: NoiseModel, decoder: str, trials: int,
                        seed: int, threads: int | None = None) -> dict:
    dec = make_decoder(code, model, decoder)
    # decoders memoise in a shared dict and are pure Python, so one worker is enough
    return simulate(code, model, trials, seed, lambda s, _lo: dec.decode_batch(s), threads=1)


# ---------------------------------------------------------------- full-error diagnosis

def full_error_diagnosis(code: StabilizerCode) -> np.ndarray:
    """H_g = Λ: the label g = H_g Λ eᵀ is e itself."""
    return gf2.swap_matrix(code.n)


def stacked_check_rank(code: StabilizerCode, H_g) -> int:
    return gf2.rank(np.vstack([code.checks, H_g]))


def reconstruct_error(code: StabilizerCode, H_g, s, g) -> np.ndarray:
    """Solve (H_c; H_g) Λ eᵀ = (s; g) for e; needs the stack to have rank 2n."""
    H = np.vstack([code.checks, np.asarray(H_g, dtype=np.uint8)])
    if gf2.rank(H) != 2 * code.n:
        raise ContractViolation("stacked matrix must have rank 2n to determine e")
    system = (H.astype(np.int64) @ gf2.swap_matrix(code.n)) % 2
    e = gf2.gf2_solve(system, np.concatenate([np.asarray(s), np.asarray(g)]))
    return e.astype(np.uint8)

