"""Streaming accumulator contract: pushes match the batch path on any prefix."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_images_close, random_dataset

from gikit import InsufficientRecordsError, SgiAccumulator, recon_sgi


@pytest.mark.parametrize("mode", [1, 2, 3])
@pytest.mark.parametrize("shift", [1, 2, 5])
def test_streaming_equals_batch(mode, shift, rng):
    ds = random_dataset(rng, 40)
    acc = SgiAccumulator(mode=mode, shift=shift)
    for rec in ds.records:
        acc.push(rec)
    batch = recon_sgi(ds, mode=mode, shift=shift)
    snap = acc.snapshot()
    assert snap.count == batch.count
    for a, b in zip(snap.images, batch.images):
        assert_images_close(a.data, b.data, 1e-12)
    np.testing.assert_allclose(snap.s_r, batch.s_r, rtol=1e-12)


@pytest.mark.parametrize("mode", [1, 2, 3])
@pytest.mark.parametrize("close_loop", [False, True])
def test_streaming_equals_batch_close_loop(mode, close_loop, rng):
    ds = random_dataset(rng, 17)
    result = recon_sgi(ds.records, mode=mode, shift=1, close_loop=close_loop)
    batch = recon_sgi(ds, mode=mode, shift=1, close_loop=close_loop)
    assert result.count == batch.count == (17 if close_loop else 16)
    for a, b in zip(result.images, batch.images):
        assert_images_close(a.data, b.data, 1e-12)


def test_snapshot_matches_batch_on_every_prefix(rng):
    ds = random_dataset(rng, 12, 4, 4)
    for mode in (1, 2, 3):
        acc = SgiAccumulator(mode=mode, shift=2)
        for i, rec in enumerate(ds.records):
            acc.push(rec)
            if acc.pairs >= 1:
                snap = acc.snapshot()
                batch = recon_sgi(ds.first(i + 1), mode=mode, shift=2)
                for a, b in zip(snap.images, batch.images):
                    assert_images_close(a.data, b.data, 1e-12)


def test_snapshot_does_not_mutate_state(rng):
    ds = random_dataset(rng, 8)
    acc = SgiAccumulator(mode=2, shift=1, close_loop=True)
    for rec in ds.records[:5]:
        acc.push(rec)
    first = acc.snapshot()
    second = acc.snapshot()
    for a, b in zip(first.images, second.images):
        np.testing.assert_array_equal(a.data, b.data)
    for rec in ds.records[5:]:
        acc.push(rec)
    final = acc.snapshot()
    batch = recon_sgi(ds, mode=2, shift=1, close_loop=True)
    for a, b in zip(final.images, batch.images):
        assert_images_close(a.data, b.data, 1e-12)


def test_accumulator_guards(rng):
    ds = random_dataset(rng, 6)
    acc = SgiAccumulator(mode=1, shift=3)
    with pytest.raises(InsufficientRecordsError):
        acc.snapshot()
    for rec in ds.records[:3]:
        acc.push(rec)
    assert acc.pairs == 0
    with pytest.raises(InsufficientRecordsError):
        acc.snapshot()
    other = random_dataset(rng, 1, 3, 3)
    with pytest.raises(ValueError):
        acc.push(other.records[0])
    with pytest.raises(ValueError):
        SgiAccumulator(mode=1, shift=2, close_loop=True)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 30), st.sampled_from([1, 2, 5]))
def test_streaming_property(seed, n, shift):
    rng = np.random.default_rng(seed)
    if n <= shift:
        shift = 1
    ds = random_dataset(rng, n, 3, 5)
    streamed = recon_sgi(iter(ds.records), mode=3, shift=shift)
    batch = recon_sgi(ds, mode=3, shift=shift)
    for a, b in zip(streamed.images, batch.images):
        assert_images_close(a.data, b.data, 1e-12)


def test_long_run_compensated_accumulation_stays_tight(rng):
    # 5k pushes at 16x16: the compensated sums must still match the batch
    # matvec essentially exactly.
    ds = random_dataset(rng, 5000, 16, 16)
    acc = SgiAccumulator(mode=1, shift=1)
    for rec in ds.records:
        acc.push(rec)
    batch = recon_sgi(ds, mode=1, shift=1)
    assert_images_close(acc.snapshot().image.data, batch.image.data, 1e-13)
