"""Planar surface and color code families in the binary symplectic picture.

Every code here encodes one logical qubit. ``logicals`` holds two rows: row 0
is an X-type logical and row 1 a Z-type logical on the same footing, chosen so
that the two anticommute. Classes are written w = (w0, w1) meaning the logical
part w0·G[0] ⊕ w1·G[1], and indexed as 2·w0 + w1, so the order is
00 < 01 < 10 < 11.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .errors import BoundExceeded, ContractViolation, InvalidDistance, NotInNormalizer
from .minweight import MinWeightSearch

FAMILIES = ("surface_unrotated", "surface_rotated", "color_488", "color_666")
SURFACE = ("surface_unrotated", "surface_rotated")
COLOR = ("color_488", "color_666")
CLASS_LABELS = ("00", "01", "10", "11")


def expected_n(family: str, d: int) -> int:
    return {
        "surface_unrotated": 2 * d * d - 2 * d + 1,
        "surface_rotated": d * d,
        "color_488": (d * d + 2 * d - 1) // 2,
        "color_666": (3 * d * d + 1) // 4,
    }[family]


@dataclass(eq=False)
class StabilizerCode:
    family: str
    d: int
    checks: np.ndarray            # H_c, (n-k) x 2n
    logicals: np.ndarray          # G, 2 x 2n
    pure_error_map: np.ndarray    # T, 2n x (n-k), t(s) = T s
    qubit_coords: np.ndarray
    stab_coords: np.ndarray
    stab_types: tuple
    faces: list = field(default_factory=list)      # qubit supports of each geometric face
    sides: list = field(default_factory=list)      # boundary strings (color codes)
    x_lines: list = field(default_factory=list)    # straight X-type logical lines (surface codes)
    z_lines: list = field(default_factory=list)
    stab_grid: np.ndarray | None = None            # (n-k, 2) cell of each check in its type's grid
    grid_shape: tuple | None = None

    @property
    def n(self) -> int:
        return self.checks.shape[1] // 2

    @property
    def k(self) -> int:
        return self.logicals.shape[0] // 2

    @property
    def H_c(self):
        return self.checks

    @property
    def G(self):
        return self.logicals

    @property
    def T(self):
        return self.pure_error_map

    @property
    def num_checks(self) -> int:
        return self.checks.shape[0]

    @property
    def logicals_by_class(self) -> dict:
        return {c: class_vector(self, c) for c in (1, 2, 3)}

    def __repr__(self):
        return f"StabilizerCode({self.family}, n={self.n}, k={self.k}, d={self.d})"


# ---------------------------------------------------------------- construction

def build_code(family: str, d: int) -> StabilizerCode:
    """Build the distance-d member of a family. d must be odd and at least 3."""
    if family not in FAMILIES:
        from .errors import UnsupportedFamily
        raise UnsupportedFamily(f"unknown family {family!r}")
    if not isinstance(d, (int, np.integer)) or d < 3 or d % 2 == 0:
        raise InvalidDistance(f"distance must be an odd integer >= 3, got {d!r}")
    d = int(d)
    builder = {
        "surface_unrotated": _surface_unrotated,
        "surface_rotated": _surface_rotated,
        "color_488": _color_488,
        "color_666": _color_666,
    }[family]
    return builder(d)


def _css_rows(n, x_supports, z_supports):
    rows = []
    for s in x_supports:
        r = np.zeros(2 * n, dtype=np.uint8)
        r[list(s)] = 1
        rows.append(r)
    for s in z_supports:
        r = np.zeros(2 * n, dtype=np.uint8)
        r[[n + q for q in s]] = 1
        rows.append(r)
    return np.array(rows, dtype=np.uint8)


def _xvec(n, support):
    v = np.zeros(2 * n, dtype=np.uint8)
    v[list(support)] = 1
    return v


def _zvec(n, support):
    v = np.zeros(2 * n, dtype=np.uint8)
    v[[n + q for q in support]] = 1
    return v


def _finish(family, d, n, x_supports, z_supports, x_logical, z_logical, qubit_coords,
            x_coords, z_coords, **extra) -> StabilizerCode:
    checks = _css_rows(n, x_supports, z_supports)
    logicals = np.array([_xvec(n, x_logical), _zvec(n, z_logical)], dtype=np.uint8)
    tmap = gf2.gf2_solve(gf2.swap_halves(checks), np.eye(len(checks), dtype=np.uint8))
    if tmap is None:
        raise RuntimeError("check matrix is rank deficient")
    code = StabilizerCode(
        family=family, d=d, checks=checks, logicals=logicals, pure_error_map=tmap,
        qubit_coords=np.asarray(qubit_coords, dtype=float),
        stab_coords=np.asarray(list(x_coords) + list(z_coords), dtype=float),
        stab_types=tuple("X" * len(x_supports) + "Z" * len(z_supports)),
        **extra,
    )
    problems = check_invariants(code)
    if problems:
        raise RuntimeError(f"{family} d={d} violates: {problems}")
    return code


def _surface_unrotated(d: int) -> StabilizerCode:
    size = 2 * d - 1
    qubits = [(r, c) for r in range(size) for c in range(size) if (r + c) % 2 == 0]
    index = {p: i for i, p in enumerate(qubits)}
    n = len(qubits)

    def support(r, c):
        return [index[(r + a, c + b)] for a, b in ((-1, 0), (1, 0), (0, -1), (0, 1))
                if (r + a, c + b) in index]

    # Z checks sit at (even, odd) sites and catch X errors; X checks at (odd, even)
    z_sites = [(r, c) for r in range(0, size, 2) for c in range(1, size, 2)]
    x_sites = [(r, c) for r in range(1, size, 2) for c in range(0, size, 2)]
    x_lines = [[index[(r, c)] for c in range(0, size, 2)] for r in range(0, size, 2)]
    z_lines = [[index[(r, c)] for r in range(0, size, 2)] for c in range(0, size, 2)]
    # both grids are d x (d-1); the X grid is transposed so the shapes agree
    grid = [((c // 2), (r - 1) // 2) for r, c in x_sites] + \
           [(r // 2, (c - 1) // 2) for r, c in z_sites]
    return _finish(
        "surface_unrotated", d, n,
        [support(*s) for s in x_sites], [support(*s) for s in z_sites],
        x_lines[0], z_lines[0], qubits, x_sites, z_sites,
        faces=[support(*s) for s in x_sites + z_sites],
        x_lines=[np.array(l) for l in x_lines], z_lines=[np.array(l) for l in z_lines],
        stab_grid=np.array(grid), grid_shape=(d, d - 1),
    )


def _surface_rotated(d: int) -> StabilizerCode:
    n = d * d

    def q(r, c):
        return r * d + c

    x_sup, z_sup, x_cen, z_cen, x_cell, z_cell = [], [], [], [], [], []
    for r in range(-1, d):
        for c in range(-1, d):
            corners = [(r + a, c + b) for a in (0, 1) for b in (0, 1)
                       if 0 <= r + a < d and 0 <= c + b < d]
            kind = "X" if (r + c) % 2 == 0 else "Z"
            if len(corners) == 4:
                pass
            elif len(corners) == 2:
                top_bottom = r in (-1, d - 1)
                if (kind == "X") != top_bottom:
                    continue
            else:
                continue
            sup = [q(*p) for p in corners]
            if kind == "X":
                x_sup.append(sup)
                x_cen.append((r + 0.5, c + 0.5))
                x_cell.append((c, r))
            else:
                z_sup.append(sup)
                z_cen.append((r + 0.5, c + 0.5))
                z_cell.append((r, c))
    grid = _rank_cells(x_cell) + _rank_cells(z_cell)
    x_lines = [[q(r, c) for r in range(d)] for c in range(d)]
    z_lines = [[q(r, c) for c in range(d)] for r in range(d)]
    coords = [(r, c) for r in range(d) for c in range(d)]
    return _finish(
        "surface_rotated", d, n, x_sup, z_sup, x_lines[0], z_lines[0], coords, x_cen, z_cen,
        faces=x_sup + z_sup,
        x_lines=[np.array(l) for l in x_lines], z_lines=[np.array(l) for l in z_lines],
        stab_grid=np.array(grid), grid_shape=(d - 1, (d + 1) // 2),
    )


def _rank_cells(cells):
    """Map (group, position) pairs to (group index, rank inside group)."""
    groups = sorted({g for g, _ in cells})
    gi = {g: i for i, g in enumerate(groups)}
    members = {}
    for g, p in cells:
        members.setdefault(g, []).append(p)
    rank = {g: {p: i for i, p in enumerate(sorted(ps))} for g, ps in members.items()}
    return [(gi[g], rank[g][p]) for g, p in cells]


def _color_666(d: int) -> StabilizerCode:
    # triangular lattice patch; sites with (i - j) % 3 == 1 are hexagon centres
    size = 3 * (d - 1) // 2
    pts = [(i, j) for i in range(size + 1) for j in range(size + 1 - i)]
    qubits = [p for p in pts if (p[0] - p[1]) % 3 != 1]
    index = {p: k for k, p in enumerate(qubits)}
    nbrs = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))
    faces, centres = [], []
    for (i, j) in pts:
        if (i - j) % 3 != 1:
            continue
        sup = [index[(i + a, j + b)] for a, b in nbrs if (i + a, j + b) in index]
        if len(sup) >= 2:
            faces.append(sorted(sup))
            centres.append((i, j))

    def xy(p):
        return (p[0] + p[1] / 2, p[1] * math.sqrt(3) / 2)

    sides = [
        [index[p] for p in qubits if p[1] == 0],
        [index[p] for p in qubits if p[0] == 0],
        [index[p] for p in qubits if p[0] + p[1] == size],
    ]
    cc = [xy(p) for p in centres]
    return _finish(
        "color_666", d, len(qubits), faces, faces, sides[0], sides[0],
        [xy(p) for p in qubits], cc, cc,
        faces=faces, sides=[np.array(s) for s in sides],
    )


# 4.8.8 patches are built on the dual lattice: octagon sites at even a+b
# (coloured by a % 2), square sites at odd a+b (colour 2). Faces are dual
# sites, qubits are dual triangles; boundary qubits attach to one virtual
# site per boundary colour.

def _site_colour(p):
    a, b = p
    return 2 if (a + b) % 2 else a % 2


def _site_ring(p):
    a, b = p
    if (a + b) % 2:
        return [(a + 1, b), (a, b + 1), (a - 1, b), (a, b - 1)]
    return [(a + 1, b), (a + 1, b + 1), (a, b + 1), (a - 1, b + 1),
            (a - 1, b), (a - 1, b - 1), (a, b - 1), (a + 1, b - 1)]


def _region_488(d: int):
    """Dual sites of the distance-d triangular 4.8.8 patch."""
    sites = [(a, 2) for a in range(5 - d, 3) if a % 2 == 0]
    for j in range((d - 3) // 2 + 1):
        start = 5 - d + 2 * (j // 2)
        sites += [(a, 1 - j) for a in range(start, start + d - 1 - 2 * j)]
    return sites


def _triangulate_488(sites):
    region = set(sites)
    qubits = {}          # key -> set of member sites (real sites and ("V", colour))
    for p in sorted(region):
        ring = _site_ring(p)
        m = len(ring)
        inner = [ring[i] in region and ring[(i + 1) % m] in region for i in range(m)]
        for i in range(m):
            if inner[i]:
                key = frozenset([p, ring[i], ring[(i + 1) % m]])
                qubits[key] = set(key)
        if all(inner):
            continue
        # each maximal run of missing wedges is one gap in the fan around p
        start = inner.index(True)
        k = 0
        while k < m:
            i = (start + k) % m
            if inner[i]:
                k += 1
                continue
            j = k
            while not inner[(start + j) % m]:
                j += 1
            edges = (ring[i], ring[(start + j) % m])
            missing = [({0, 1, 2} - {_site_colour(p), _site_colour(e)}).pop() for e in edges]
            for e, c in zip(edges, missing):
                key = frozenset([p, e, ("V", c)])
                qubits[key] = {p, e, ("V", c)}
            if missing[0] != missing[1]:
                key = frozenset([p, ("V", missing[0]), ("V", missing[1]), ("gap", i)])
                qubits[key] = {p, ("V", missing[0]), ("V", missing[1])}
            k = j
    return list(qubits.values())


def _color_488(d: int) -> StabilizerCode:
    sites = sorted(_region_488(d))
    members = sorted(_triangulate_488(sites), key=lambda s: sorted(map(str, s)))

    def xy(p):
        return ((p[0] + p[1]) / 2, (p[1] - p[0]) / 2)

    site_xy = {p: np.array(xy(p)) for p in sites}
    centre = np.mean(list(site_xy.values()), axis=0)
    coords = []
    for mem in members:
        real = [site_xy[p] for p in mem if p in site_xy]
        pos = np.mean(real, axis=0)
        if len(real) < 3:
            # boundary qubits sit outside the real sites they touch
            pos = pos + 0.35 * (pos - centre) / (np.linalg.norm(pos - centre) + 1e-12)
        coords.append(tuple(pos))
    faces = [sorted(qi for qi, mem in enumerate(members) if p in mem) for p in sites]
    sides = [np.array([qi for qi, mem in enumerate(members) if ("V", c) in mem]) for c in range(3)]
    fc = [xy(p) for p in sites]
    return _finish(
        "color_488", d, len(members), faces, faces, sides[0], sides[0], coords, fc, fc,
        faces=faces, sides=sides,
    )


# ---------------------------------------------------------------- invariants

def check_invariants(code: StabilizerCode) -> list[str]:
    """Return the list of violated structural invariants (empty when sound)."""
    bad = []
    n, k = code.n, code.k
    h, g = code.checks, code.logicals
    if gf2.symplectic_matrix(h, h).any():
        bad.append("stabilizers do not commute")
    if gf2.symplectic_matrix(h, g).any():
        bad.append("logicals do not commute with stabilizers")
    if not np.array_equal(gf2.symplectic_matrix(g, g), np.array([[0, 1], [1, 0]])):
        bad.append("logical pair is not canonical")
    if gf2.rank(h) != n - k:
        bad.append("check matrix rank")
    if gf2.rank(np.vstack([h, g])) != n + k:
        bad.append("stacked rank")
    if not np.array_equal(gf2.symplectic_matrix(h, code.pure_error_map.T), np.eye(n - k)):
        bad.append("pure error map")
    if n != expected_n(code.family, code.d):
        bad.append(f"n={n} differs from family formula {expected_n(code.family, code.d)}")
    return bad


# ---------------------------------------------------------------- maps

def _check_len(code, v, what="error"):
    v = np.asarray(v)
    if v.shape[-1] != 2 * code.n:
        raise ContractViolation(f"{what} length {v.shape[-1]} != 2n = {2 * code.n}")
    return v


def syndrome(code: StabilizerCode, e) -> np.ndarray:
    """s = H_c Λ eᵀ; accepts a single vector or a stack of row vectors."""
    e = _check_len(code, e)
    s = gf2.symplectic_matrix(np.atleast_2d(e), code.checks)
    return s[0] if e.ndim == 1 else s


def pure_error(code: StabilizerCode, s) -> np.ndarray:
    s = np.asarray(s)
    if s.shape[-1] != code.num_checks:
        raise ContractViolation(f"syndrome length {s.shape[-1]} != {code.num_checks}")
    t = (np.atleast_2d(s).astype(np.int64) @ code.pure_error_map.T.astype(np.int64)) & 1
    t = t.astype(np.uint8)
    return t[0] if s.ndim == 1 else t


def class_bits(code: StabilizerCode, v) -> np.ndarray:
    """(w0, w1) for each row of v, without checking the syndrome."""
    v = _check_len(code, v)
    g = code.logicals
    # pairing with the Z-type logical detects an X-type component and vice versa
    p = gf2.symplectic_matrix(np.atleast_2d(v), g[::-1])
    return p[0] if v.ndim == 1 else p


def class_index(code: StabilizerCode, v) -> int | np.ndarray:
    b = class_bits(code, v).astype(np.int64)
    idx = 2 * b[..., 0] + b[..., 1]
    return int(idx) if np.ndim(idx) == 0 else idx


def logical_class(code: StabilizerCode, v) -> tuple[int, int]:
    """Class (w0, w1) of a normalizer element; raises if v has a syndrome."""
    v = _check_len(code, v)
    if v.ndim != 1:
        raise ContractViolation("logical_class takes one vector")
    if syndrome(code, v).any():
        raise NotInNormalizer("vector has a nonzero syndrome")
    w = class_bits(code, v)
    return int(w[0]), int(w[1])


def class_vector(code: StabilizerCode, cls) -> np.ndarray:
    """w·G for a class given as index 0..3 or as a (w0, w1) pair."""
    if not isinstance(cls, (int, np.integer)):
        cls = 2 * int(cls[0]) + int(cls[1])
    w0, w1 = divmod(int(cls), 2)
    return ((w0 * code.logicals[0]) ^ (w1 * code.logicals[1])).astype(np.uint8)


def class_vectors(code: StabilizerCode) -> np.ndarray:
    """4 x 2n stack of w·G in class order."""
    return np.array([class_vector(code, c) for c in range(4)], dtype=np.uint8)


# ---------------------------------------------------------------- searches

def _logical_search(code: StabilizerCode, allowed=(1, 2, 3)) -> tuple[MinWeightSearch, int]:
    rows = np.vstack([code.checks, code.logicals[1], code.logicals[0]])
    return MinWeightSearch(rows, code.n, allowed), code.num_checks


def code_distance(code: StabilizerCode, max_weight: int) -> int:
    """Minimum weight of a normalizer element with nonzero class."""
    search, off = _logical_search(code)
    targets = {1 << off, 1 << (off + 1), (1 << off) | (1 << (off + 1))}
    w, _ = search.solutions(0, max_weight, targets=targets)
    return w


def min_weight_logical(code: StabilizerCode, cls: int, max_weight: int) -> np.ndarray:
    """Lightest representative of class ``cls``; ties go to the smallest bit vector."""
    if cls not in (1, 2, 3):
        raise ContractViolation("class must be nonzero")
    w0, w1 = divmod(cls, 2)
    search, off = _logical_search(code)
    target = (w0 << off) | (w1 << (off + 1))
    _, sols = search.solutions(target, max_weight)
    vecs = [search.to_vector(s) for s in sols[target]]
    return min(vecs, key=lambda v: tuple(v.tolist()))


def pauli_string(v) -> str:
    v = np.asarray(v)
    n = v.shape[-1] // 2
    return "".join("IZXY"[2 * int(v[i]) + int(v[n + i])] for i in range(n))


def describe(code: StabilizerCode, with_distance: bool = False) -> dict:
    """JSON-ready summary: parameters, stabilizer table and chosen logicals."""
    info = {
        "family": code.family, "n": code.n, "k": code.k, "d": code.d,
        "stabilizers": [
            {"type": t, "support": [int(q) for q in np.nonzero(
                row[:code.n] if t == "X" else row[code.n:])[0]],
             "coord": [float(x) for x in c]}
            for t, row, c in zip(code.stab_types, code.checks, code.stab_coords)
        ],
        "logicals": {"X": pauli_string(code.logicals[0]), "Z": pauli_string(code.logicals[1])},
    }
    if with_distance:
        try:
            info["distance_checked"] = code_distance(code, code.d)
        except BoundExceeded:
            info["distance_checked"] = None
    return info
