import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topodecode.codes import class_index, pure_error, syndrome
from topodecode.dataset import (Dataset, generate_dataset, read_dataset, samples,
                                write_dataset)
from topodecode.diagnosis import faithful_columns
from topodecode.errors import CorruptPayload, VersionMismatch
from topodecode.noise import NoiseModel

from conftest import code_for, scheme_for

MODEL = NoiseModel("depolarizing", 0.12)


def small():
    return code_for("surface_rotated", 3), scheme_for("surface_rotated", 3, "uniform")


def test_labels_match_syndrome_and_class():
    code, sch = small()
    e, s, g = samples(code, sch, MODEL, 5, 0, 500)
    assert np.array_equal(s, syndrome(code, e))
    for i in range(len(e)):
        w = class_index(code, e[i] ^ pure_error(code, s[i]))
        assert np.array_equal(g[i], faithful_columns(code, sch.H_g, s[i])[w])


@pytest.mark.parametrize("threads", [1, 2, 4])
def test_generation_is_thread_independent(threads):
    code, sch = small()
    ref = generate_dataset(code, sch, MODEL, 9000, seed=3, threads=1)
    assert generate_dataset(code, sch, MODEL, 9000, seed=3, threads=threads) == ref


def test_env_cap_does_not_change_content(monkeypatch):
    code, sch = small()
    ref = generate_dataset(code, sch, MODEL, 5000, seed=8, threads=1)
    monkeypatch.setenv("TOPODECODE_THREADS", "3")
    assert generate_dataset(code, sch, MODEL, 5000, seed=8) == ref


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 300), st.integers(0, 10 ** 6))
def test_roundtrip(tmp_path_factory, count, seed):
    code = code_for("color_488", 3)
    sch = scheme_for("color_488", 3, "uniform")
    ds = generate_dataset(code, sch, MODEL, count, seed)
    path = tmp_path_factory.mktemp("qds") / "d.qds"
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back == ds
    assert back.header["count"] == count and back.header["scheme_id"] == sch.scheme_id()


def test_header_fields():
    code, sch = small()
    ds = generate_dataset(code, sch, MODEL, 10, 1)
    h = ds.header
    assert h["family"] == "surface_rotated" and h["d"] == 3
    assert h["noise"] == {"kind": "depolarizing", "p": 0.12}
    assert h["syndrome_bits"] == 8 and h["diagnosis_bits"] == 9
    assert isinstance(ds, Dataset) and len(ds) == 10


def test_corrupt_and_version_errors(tmp_path):
    code, sch = small()
    path = tmp_path / "d.qds"
    write_dataset(generate_dataset(code, sch, MODEL, 50, 1), path)
    raw = path.read_bytes()

    (tmp_path / "trunc.qds").write_bytes(raw[:-3])
    with pytest.raises(CorruptPayload):
        read_dataset(tmp_path / "trunc.qds")

    (tmp_path / "magic.qds").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(CorruptPayload):
        read_dataset(tmp_path / "magic.qds")

    magic, _, hlen = struct.unpack_from("<4sII", raw)
    (tmp_path / "ver.qds").write_bytes(struct.pack("<4sII", magic, 99, hlen) + raw[12:])
    with pytest.raises(VersionMismatch):
        read_dataset(tmp_path / "ver.qds")

    (tmp_path / "short.qds").write_bytes(raw[:5])
    with pytest.raises(CorruptPayload):
        read_dataset(tmp_path / "short.qds")
