"""Exact minimum-weight Pauli search with syndrome-guided branching.

The search looks for the fewest single-qubit Paulis whose combined effect on a
set of parity bits equals a target. It always branches on the lowest
unsatisfied bit: one of the Paulis that flip that bit must be in any solution,
so iterative deepening over the weight is exhaustive. Parity bits are packed
into Python ints, which keeps the inner loop cheap.
"""
from __future__ import annotations

import numpy as np

from .errors import BoundExceeded

PAULI_X, PAULI_Y, PAULI_Z = 1, 2, 3


def pauli_bits(p: int) -> tuple[int, int]:
    """(x, z) bits of X=1, Y=2, Z=3."""
    return {1: (1, 0), 2: (1, 1), 3: (0, 1)}[p]


def _to_int(bits) -> int:
    out = 0
    for i in np.nonzero(np.asarray(bits))[0]:
        out |= 1 << int(i)
    return out


class MinWeightSearch:
    """Branch-and-bound search over errors drawn from ``allowed`` Paulis.

    ``parity_rows`` is an (r x 2n) matrix; the effect of an error e is the
    vector of symplectic products of e with each row. ``allowed`` is a
    sequence of Pauli codes (1=X, 2=Y, 3=Z) permitted on every qubit.
    """

    def __init__(self, parity_rows: np.ndarray, n: int, allowed=(1, 2, 3)):
        rows = np.asarray(parity_rows, dtype=np.uint8)
        self.n = n
        self.nbits = rows.shape[0]
        # the effect of X on qubit q flips rows with a Z on q, and vice versa
        flip_x = rows[:, n:].T
        flip_z = rows[:, :n].T
        self.moves: list[tuple[int, int, int]] = []
        for q in range(n):
            for p in allowed:
                x, z = pauli_bits(p)
                eff = (flip_x[q] * x) ^ (flip_z[q] * z)
                m = _to_int(eff)
                if m:
                    self.moves.append((q, p, m))
        self.by_bit: list[list[tuple[int, int, int]]] = [[] for _ in range(self.nbits)]
        for mv in self.moves:
            m = mv[2]
            while m:
                low = m & -m
                self.by_bit[low.bit_length() - 1].append(mv)
                m ^= low
        self.max_flip = max((bin(m).count("1") for _, _, m in self.moves), default=1)

    def solutions(self, target: int, max_weight: int, targets: set[int] | None = None):
        """All minimum-weight solutions as sorted tuples of (qubit, pauli).

        With ``targets`` given, any member counts as a hit and the result maps
        each reached target to its solutions at the minimal weight.
        """
        goal = {target} if targets is None else set(targets)
        if 0 in goal:
            return 0, {0: [()]}
        for w in range(1, max_weight + 1):
            found: dict[int, set] = {}
            self._dfs(goal, 0, w, (), frozenset(), found, set())
            if found:
                return w, {t: sorted(s) for t, s in found.items()}
        raise BoundExceeded(f"no solution up to weight {max_weight}")

    def _dfs(self, goal, state, left, chosen, used, found, seen):
        # state is the accumulated effect; reach any goal by exact match
        if left == 0:
            if state in goal:
                found.setdefault(state, set()).add(tuple(sorted(chosen)))
            return
        key = frozenset(chosen)
        if key in seen:
            return
        seen.add(key)
        for g in goal:
            r = state ^ g
            if r == 0:
                continue
            if bin(r).count("1") > left * self.max_flip:
                continue
            low = (r & -r).bit_length() - 1
            for q, p, m in self.by_bit[low]:
                if q in used:
                    continue
                self._dfs(goal, state ^ m, left - 1, chosen + ((q, p),), used | {q},
                          found, seen)

    def to_vector(self, sol) -> np.ndarray:
        e = np.zeros(2 * self.n, dtype=np.uint8)
        for q, p in sol:
            x, z = pauli_bits(p)
            e[q] ^= x
            e[self.n + q] ^= z
        return e


def pack_int(bits) -> int:
    return _to_int(bits)
