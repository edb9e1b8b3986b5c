import itertools
from functools import lru_cache

import numpy as np
import pytest

from topodecode.codes import class_index, pure_error, syndrome
from topodecode.decode import (ConstantPredictor, ExactL2Predictor, argmax_lowest,
                               class_probabilities, decode_labels, decode_one,
                               exact_l2_diagnosis, exact_optimal_class, is_success,
                               logical_error_rate, wilson)
from topodecode.diagnosis import diagnosis_of
from topodecode.errors import ContractViolation, NotDecomposable, TooLarge, UnreachableSyndrome
from topodecode.noise import NoiseModel, log_prob, sample_errors

from conftest import code_for, scheme_for

BIT = NoiseModel("bit_flip", 0.1)
DEP = NoiseModel("depolarizing", 0.15)


@lru_cache(maxsize=None)
def all_errors(n):
    """Every Pauli on n qubits as (x | z) rows."""
    digits = np.array(list(itertools.product((0, 1, 2, 3), repeat=n)), dtype=np.uint8)
    x = ((digits == 1) | (digits == 2)).astype(np.uint8)
    z = ((digits == 2) | (digits == 3)).astype(np.uint8)
    return np.concatenate([x, z], axis=1)


@lru_cache(maxsize=None)
def brute_tables(model):
    """Oracle: Pr[s, class] and Σ Pr[e]·g(e) per syndrome by full enumeration."""
    code = code_for("surface_rotated", 3)
    sch = scheme_for("surface_rotated", 3, "uniform")
    e = all_errors(code.n)
    s = syndrome(code, e)
    w = class_index(code, e ^ pure_error(code, s))
    p = np.exp(log_prob(model, e))
    keys = s.astype(np.int64) @ (1 << np.arange(code.num_checks))
    probs = np.zeros((2 ** code.num_checks, 4))
    np.add.at(probs, (keys, w), p)
    g = diagnosis_of(sch, e).astype(float)
    gsum = np.zeros((2 ** code.num_checks, sch.rows))
    np.add.at(gsum, keys, p[:, None] * g)
    return probs, gsum


def syndrome_bits(k, r):
    return ((k >> np.arange(r)) & 1).astype(np.uint8)


@pytest.mark.parametrize("model", [BIT, DEP], ids=["bit_flip", "depolarizing"])
def test_class_probabilities_match_enumeration(model):
    code = code_for("surface_rotated", 3)
    sch = scheme_for("surface_rotated", 3, "uniform")
    probs, gsum = brute_tables(model)
    checked = 0
    for k in range(2 ** code.num_checks):
        total = probs[k].sum()
        s = syndrome_bits(k, code.num_checks)
        if total == 0:
            with pytest.raises(UnreachableSyndrome):
                class_probabilities(code, model, s)
            continue
        np.testing.assert_allclose(class_probabilities(code, model, s), probs[k] / total,
                                   rtol=1e-9, atol=1e-15)
        np.testing.assert_allclose(exact_l2_diagnosis(code, sch, model, s), gsum[k] / total,
                                   rtol=1e-9, atol=1e-12)
        checked += 1
    assert checked == (16 if model.kind == "bit_flip" else 256)


@pytest.mark.parametrize("model", [BIT, DEP], ids=["bit_flip", "depolarizing"])
@pytest.mark.parametrize("kind", ["uniform", "short"])
def test_l2_diagnosis_decodes_to_optimal_class(model, kind):
    code = code_for("surface_rotated", 3)
    sch = scheme_for("surface_rotated", 3, kind)
    pred = ExactL2Predictor(code, sch, model)
    probs, _ = brute_tables(model)
    for k in np.nonzero(probs.sum(1))[0]:
        s = syndrome_bits(int(k), code.num_checks)
        out = decode_one(code, sch, pred, s)
        assert out.chosen_class == exact_optimal_class(code, model, s)
        # the recovered weights are the class probabilities themselves
        np.testing.assert_allclose(out.q, probs[k] / probs[k].sum(), atol=1e-9)


def test_perfect_labels_always_succeed():
    for fam in ["surface_unrotated", "color_666", "color_488"]:
        code = code_for(fam, 5)
        sch = scheme_for(fam, 5, "uniform")
        e = sample_errors(DEP, code.n, 1, 0, 2000)
        s = syndrome(code, e)
        rec, cls, _ = decode_labels(code, sch, s, diagnosis_of(sch, e))
        assert is_success(code, e, rec).all()
        assert np.array_equal(cls, class_index(code, e ^ pure_error(code, s)))


def test_perturbations_below_M_keep_the_class():
    code = code_for("surface_rotated", 5)
    sch = scheme_for("surface_rotated", 5, "uniform")
    M = sch.metrics()["M"]
    e = sample_errors(DEP, code.n, 2, 0, 200)
    s = syndrome(code, e)
    g = diagnosis_of(sch, e).astype(float)
    rng = np.random.default_rng(0)
    u = rng.normal(size=g.shape)
    u *= np.sqrt(M * rng.uniform(0, 1, (len(g), 1)) * 0.999) / np.linalg.norm(u, axis=1,
                                                                                keepdims=True)
    _, cls_clean, _ = decode_labels(code, sch, s, g)
    _, cls_noisy, _ = decode_labels(code, sch, s, g + u)
    assert np.array_equal(cls_clean, cls_noisy)


def test_argmax_ties_go_low():
    assert argmax_lowest(np.array([0.2, 0.4, 0.4, 0.0])) == 1
    assert argmax_lowest(np.array([0.4, 0.4 - 1e-12, 0.2, 0.0])) == 0
    assert argmax_lowest(np.array([0.4 - 1e-12, 0.4, 0.2, 0.0])) == 0
    assert list(argmax_lowest(np.array([[0, 1, 1, 0], [1, 0, 0, 0]]))) == [1, 0]


def test_wilson_against_statsmodels():
    proportion = pytest.importorskip("statsmodels.stats.proportion")
    for k, n in [(0, 10), (3, 10), (50, 1000), (999, 1000), (12000, 100000)]:
        lo, hi = wilson(k, n)
        ref = proportion.proportion_confint(k, n, alpha=0.05, method="wilson")
        assert lo == pytest.approx(ref[0], abs=1e-9) and hi == pytest.approx(ref[1], abs=1e-9)


def test_error_rate_independent_of_threads():
    code = code_for("surface_rotated", 3)
    sch = scheme_for("surface_rotated", 3, "short")
    pred = ConstantPredictor(np.full(sch.rows, 0.3))
    a = logical_error_rate(code, sch, pred, DEP, 10_000, seed=4, threads=1)
    b = logical_error_rate(code, sch, pred, DEP, 10_000, seed=4, threads=3)
    assert a == b
    assert a["ci_low"] <= a["rate"] <= a["ci_high"]


def test_is_success_basics():
    code = code_for("surface_rotated", 3)
    z = np.zeros(2 * code.n, dtype=np.uint8)
    assert is_success(code, z, z)
    assert not is_success(code, z, code.logicals[0])
    assert is_success(code, code.checks[0], z)
    with pytest.raises(ContractViolation):
        is_success(code, z, z[:-1])


def test_exact_oracles_refuse_large_codes():
    with pytest.raises(TooLarge):
        class_probabilities(code_for("surface_rotated", 5), BIT,
                            np.zeros(24, dtype=np.uint8))


def test_decode_rejects_bad_inputs():
    code = code_for("surface_rotated", 3)
    sch = scheme_for("surface_rotated", 3, "uniform")
    with pytest.raises(ContractViolation):
        decode_labels(code, sch, np.zeros((1, 8), np.uint8), np.zeros((1, 4)))
    from topodecode.diagnosis import DiagnosisScheme
    flat = DiagnosisScheme(code, code.logicals[:1])
    with pytest.raises(NotDecomposable):
        decode_labels(code, flat, np.zeros((1, 8), np.uint8), np.zeros((1, 1)))
