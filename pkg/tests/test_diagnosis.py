import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from topodecode import gf2
from topodecode.codes import FAMILIES, SURFACE, class_index, pure_error, syndrome
from topodecode.diagnosis import (DiagnosisScheme, analyze, boundary_distance, diagnosis_of,
                                  faithful_columns, is_decomposable, is_faithful, lower_bound,
                                  sensitivity, sigma)
from topodecode.errors import ContractViolation, NotDecomposable
from topodecode.noise import NoiseModel, sample_errors

from conftest import code_for, scheme_for

# m, M per family for the uniform scheme at d = 3, 5, 7 (worked out by hand from the
# line geometry for the surface codes; the color values are pinned regressions)
UNIFORM_TABLE = {
    "surface_rotated": (2, [1.5, 2.5, 3.5]),
    "surface_unrotated": (2, [1.5, 2.5, 3.5]),
    "color_666": (6, [3.0, 4.5, 6.0]),
    "color_488": (8, [4.0, 6.0, 8.0]),
}
UNIFORM_ROWS = {
    "surface_rotated": lambda d: 3 * d,
    "surface_unrotated": lambda d: 3 * d,
    "color_666": lambda d: 9 * (d + 1) // 2,
    "color_488": lambda d: 6 * (d + 1),
}


def hyperplane_distance(scheme):
    """Oracle: squared distance from each label to the decoder's decision
    hyperplanes q_w = q_v, read off D⁻¹ directly."""
    g = scheme.D[:-1].T
    best = np.inf
    for w in range(4):
        for v in range(4):
            if v != w:
                r = scheme.D_inv[w] - scheme.D_inv[v]
                a, b = r[:-1], r[-1]
                best = min(best, (a @ g[w] + b) ** 2 / (a @ a))
    return best


def test_short_scheme_D_matrix():
    sch = scheme_for("surface_rotated", 3, "short")
    want = np.array([[0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0], [1, 1, 1, 1]], dtype=float)
    assert np.array_equal(sch.D, want)
    assert np.linalg.matrix_rank(sch.D) == 4


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("kind", ["uniform", "short"])
def test_schemes_are_faithful_and_decomposable(family, kind):
    code = code_for(family, 5)
    sch = scheme_for(family, 5, kind)
    assert is_faithful(code, sch.H_g)
    assert is_decomposable(code, sch.H_g)
    assert sch.decomposable


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("d", [3, 5, 7])
def test_uniform_metrics(family, d):
    sch = scheme_for(family, d, "uniform")
    m, Ms = UNIFORM_TABLE[family]
    M = Ms[(d - 3) // 2]
    assert sch.rows == UNIFORM_ROWS[family](d)
    assert sensitivity(sch.H_g) == m
    assert boundary_distance(sch) == pytest.approx(M, abs=1e-9)
    assert hyperplane_distance(sch) == pytest.approx(M, abs=1e-9)
    info = analyze(sch)
    assert info["N"] >= lower_bound(sch.code) - 1e-12


@pytest.mark.parametrize("family", FAMILIES)
def test_short_metrics(family):
    sch = scheme_for(family, 3, "short")
    assert boundary_distance(sch) == pytest.approx(0.5)
    assert hyperplane_distance(sch) == pytest.approx(0.5)


def test_sensitivity_oracle():
    """Oracle: flip each bit of e and count how many label bits change."""
    sch = scheme_for("color_666", 3, "uniform")
    n2 = 2 * sch.code.n
    base = diagnosis_of(sch, np.zeros(n2, dtype=np.uint8))
    worst = 0
    for i in range(n2):
        e = np.zeros(n2, dtype=np.uint8)
        e[i] = 1
        worst = max(worst, int((diagnosis_of(sch, e) != base).sum()))
    assert sensitivity(sch.H_g) == worst


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_label_depends_only_on_syndrome_and_class(seed):
    code = code_for("surface_unrotated", 3)
    sch = scheme_for("surface_unrotated", 3, "uniform")
    e = sample_errors(NoiseModel("depolarizing", 0.3), code.n, seed, 0, 1)[0]
    s = syndrome(code, e)
    cols = faithful_columns(code, sch.H_g, s)
    # the class of an error is that of e ⊕ t(s), a normalizer element
    w = class_index(code, e ^ pure_error(code, s))
    assert np.array_equal(diagnosis_of(sch, e), cols[w])


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, 7, elements=st.integers(0, 1)),
       arrays(np.float64, 7, elements=st.floats(-3, 3)),
       arrays(np.float64, 7, elements=st.floats(-3, 3)))
def test_sigma_is_involutive_isometry(delta, u, v):
    assert np.allclose(sigma(delta, sigma(delta, u)), u)
    assert np.isclose(np.linalg.norm(sigma(delta, u) - sigma(delta, v)), np.linalg.norm(u - v))
    bits = (u > 0).astype(np.uint8)
    assert np.array_equal(sigma(delta, bits), bits ^ delta)


def test_delta_map_matches_pure_error():
    code = code_for("surface_rotated", 5)
    sch = scheme_for("surface_rotated", 5, "uniform")
    s = np.random.default_rng(4).integers(0, 2, (20, code.num_checks)).astype(np.uint8)
    want = gf2.symplectic_matrix(pure_error(code, s), sch.H_g)
    got = (s.astype(np.int64) @ sch.delta_map.T.astype(np.int64)) & 1
    assert np.array_equal(got, want)


def test_unfaithful_and_degenerate_schemes():
    code = code_for("surface_rotated", 3)
    # one stabilizer row carries no class information
    assert not is_faithful(code, code.checks[:1])
    # one logical row gives only two distinct labels, so D has rank 2
    sch = DiagnosisScheme(code, code.logicals[:1])
    assert not sch.decomposable
    with pytest.raises(NotDecomposable):
        boundary_distance(sch)
    with pytest.raises(ContractViolation):
        DiagnosisScheme(code, np.zeros((1, 5)))


def test_lower_bound_holds_for_short_too():
    for fam in SURFACE:
        sch = scheme_for(fam, 5, "short")
        assert analyze(sch)["N"] >= lower_bound(sch.code)


def test_scheme_id_tracks_matrix():
    a = scheme_for("surface_rotated", 3, "uniform")
    b = scheme_for("surface_rotated", 3, "short")
    assert a.scheme_id() != b.scheme_id()
    assert a.scheme_id() == DiagnosisScheme(a.code, a.H_g.copy()).scheme_id()
