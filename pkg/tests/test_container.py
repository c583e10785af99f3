import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ostf import (make_ensemble, make_grid, random_besov_field,
                  read_container, read_meta, taylor_green, write_container)
from ostf.container import MAGIC
from ostf.errors import (CorruptContainerError, InvalidTimesError,
                         NotAContainerError, ShapeMismatchError,
                         VersionMismatchError)
from ostf.fields import GridField


@pytest.fixture()
def sample_path(tmp_path, grid64):
    members = [random_besov_field(grid64, 0.5, seed=3, k_min=2, k_max=10,
                                  member=m) for m in range(3)]
    ens = make_ensemble(members, weights=[0.5, 0.25, 0.25])
    path = tmp_path / "sample.ostf"
    write_container(ens, path, extra_meta={"generator": "random-besov",
                                           "seed": 3, "alpha": 0.5})
    return path, ens


class TestRoundTrip:
    def test_bit_exact(self, sample_path):
        path, ens = sample_path
        back = read_container(path)
        assert back.size == ens.size
        assert np.array_equal(back.weights, ens.weights)
        assert np.array_equal(back.times, ens.times)
        for a, b in zip(back.members, ens.members):
            assert np.array_equal(a.velocity, b.velocity)

    def test_pressure_round_trip(self, tmp_path, tg64):
        ens = make_ensemble([tg64])
        path = tmp_path / "tg.ostf"
        write_container(ens, path)
        back = read_container(path)
        assert back.has_pressure
        assert np.array_equal(back.members[0].pressure, tg64.pressure)

    def test_rewrite_is_byte_identical(self, tmp_path, sample_path):
        path, ens = sample_path
        second = tmp_path / "again.ostf"
        write_container(ens, second,
                        extra_meta={"generator": "random-besov", "seed": 3,
                                    "alpha": 0.5})
        assert path.read_bytes() == second.read_bytes()

    def test_meta_reader(self, sample_path):
        path, _ = sample_path
        meta = read_meta(path)
        assert meta["generator"] == "random-besov"
        assert meta["members"] == 3


class TestNegativeControls:
    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.ostf"
        path.write_bytes(b"NOTOST" + b"\0" * 64)
        with pytest.raises(NotAContainerError):
            read_container(path)

    def test_truncated_payload(self, sample_path):
        path, _ = sample_path
        raw = path.read_bytes()
        path.write_bytes(raw[:-100])
        with pytest.raises(CorruptContainerError) as err:
            read_container(path)
        assert err.value.offset > 0

    def test_member_count_mismatch(self, sample_path, tmp_path):
        path, _ = sample_path
        raw = bytearray(path.read_bytes())
        meta_len = int(np.frombuffer(raw, dtype="<u8", count=1,
                                     offset=len(MAGIC))[0])
        start = len(MAGIC) + 8
        meta = json.loads(raw[start:start + meta_len].decode())
        meta["members"] = 2
        blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
        # meta says 2 members but payload holds 3
        out = tmp_path / "mismatch.ostf"
        out.write_bytes(MAGIC + np.uint64(len(blob)).astype("<u8").tobytes()
                        + blob + bytes(raw[start + meta_len:]))
        with pytest.raises((ShapeMismatchError, CorruptContainerError)):
            read_container(out)

    def test_non_increasing_times(self, tmp_path, grid64):
        times = np.array([0.0, 0.5, 1.0])
        vel = np.zeros((3, 2) + grid64.shape)
        ens = make_ensemble([GridField(grid=grid64, times=times, velocity=vel)])
        path = tmp_path / "times.ostf"
        write_container(ens, path)
        raw = bytearray(path.read_bytes())
        meta_len = int(np.frombuffer(raw, dtype="<u8", count=1,
                                     offset=len(MAGIC))[0])
        start = len(MAGIC) + 8
        meta = json.loads(raw[start:start + meta_len].decode())
        meta["times"] = [0.0, 0.5, 0.5]
        blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
        assert len(blob) == meta_len  # same digits, same length
        raw[start:start + meta_len] = blob
        path.write_bytes(bytes(raw))
        with pytest.raises(InvalidTimesError):
            read_container(path)

    def test_version_mismatch(self, sample_path, tmp_path):
        path, _ = sample_path
        raw = bytearray(path.read_bytes())
        meta_len = int(np.frombuffer(raw, dtype="<u8", count=1,
                                     offset=len(MAGIC))[0])
        start = len(MAGIC) + 8
        meta = json.loads(raw[start:start + meta_len].decode())
        meta["version"] = 9
        blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
        out = tmp_path / "version.ostf"
        out.write_bytes(MAGIC + np.uint64(len(blob)).astype("<u8").tobytes()
                        + blob + bytes(raw[start + meta_len:]))
        with pytest.raises(VersionMismatchError):
            read_container(out)


@given(st.integers(min_value=1, max_value=3),
       st.integers(min_value=1, max_value=3),
       st.booleans())
@settings(max_examples=12, deadline=None)
def test_round_trip_property(members, snapshots, with_pressure):
    import tempfile
    from pathlib import Path

    g = make_grid(2, 8)
    rng = np.random.default_rng(members * 7 + snapshots)
    times = np.sort(rng.uniform(0, 1, snapshots))
    times += np.arange(snapshots) * 1e-3  # enforce strict increase
    fields = []
    for _ in range(members):
        vel = rng.standard_normal((snapshots, 2) + g.shape)
        pre = rng.standard_normal((snapshots,) + g.shape) if with_pressure else None
        fields.append(GridField(grid=g, times=times, velocity=vel,
                                pressure=pre))
    ens = make_ensemble(fields)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "prop.ostf"
        write_container(ens, path)
        back = read_container(path)
        for a, b in zip(back.members, ens.members):
            assert np.array_equal(a.velocity, b.velocity)
            if with_pressure:
                assert np.array_equal(a.pressure, b.pressure)
            assert np.array_equal(a.times, b.times)
