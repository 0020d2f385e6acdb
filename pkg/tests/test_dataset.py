import hashlib
from collections import Counter

import numpy as np
import pytest

from core.errors import DataError, InvalidArgumentError
from schemas.dataset_schema import CorpusSpec, fold_name
from schemas.signal_schema import CLASS_ORDER, SignalClass
from schemas.spectro_schema import SpectroConfig
from services import sigsim
from services.dataset import (
    DEFAULT_SWEEP_AMPLITUDES,
    TEST_SET_COUNTS,
    generate_corpus,
    generate_sweep,
    item_seed,
    kfold_split,
    load_features,
    read_iq,
    write_iq,
)
from services.manifest_repo import manifest_path, read_manifest, write_manifest

L = 196608


def digests(root):
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.rglob("*")) if p.is_file()}


def test_iq_file_round_trip(tmp_path):
    _, series = sigsim.simulate(SignalClass.squigglesquarepulsednarrowband, seed=11)
    path = write_iq(series, tmp_path / "x.iq8")
    assert path.stat().st_size == 2 * L
    back = read_iq(path)
    assert np.array_equal(back.re, series.re) and np.array_equal(back.im, series.im)
    raw = np.frombuffer(path.read_bytes(), dtype=np.int8)
    assert raw[0] == series.re[0] and raw[1] == series.im[0]


def test_read_iq_rejects_wrong_size(tmp_path):
    empty = tmp_path / "empty.iq8"
    empty.write_bytes(b"")
    with pytest.raises(DataError):
        read_iq(empty)
    with pytest.raises(DataError):
        read_iq(tmp_path / "missing.iq8")


def test_item_seeds_are_distinct():
    seeds = {
        item_seed(7, split, c, i)
        for split in ("train", "test")
        for c in CLASS_ORDER
        for i in range(50)
    }
    assert len(seeds) == 2 * 7 * 50
    assert item_seed(7, "sweep", SignalClass.noise, 0, group=1) != item_seed(7, "sweep", SignalClass.noise, 0, group=2)


def test_corpus_generation_is_byte_identical_on_rerun(tmp_path):
    spec = CorpusSpec.uniform(2, master_seed=4, out_dir=tmp_path / "a")
    records = generate_corpus(spec, threads=3)
    assert len(records) == 14
    assert Counter(r.signal_class for r in records) == {c: 2 for c in CLASS_ORDER}
    assert len({r.id for r in records}) == 14
    for record in records:
        assert (tmp_path / "a" / record.file).stat().st_size == 2 * L
        assert record.params.signal_class is record.signal_class

    generate_corpus(spec.model_copy(update={"out_dir": tmp_path / "b"}), threads=1)
    assert digests(tmp_path / "a") == digests(tmp_path / "b")
    assert read_manifest(tmp_path / "a") == records


def test_empty_corpus_writes_only_a_manifest(tmp_path):
    records = generate_corpus(CorpusSpec(counts={}, out_dir=tmp_path))
    assert records == []
    assert manifest_path(tmp_path).read_text() == ""
    assert not (tmp_path / "data").exists()


def test_published_test_set_counts():
    assert sum(TEST_SET_COUNTS.values()) == 2495
    assert set(TEST_SET_COUNTS) == set(CLASS_ORDER)


def test_kfold_is_a_stratified_partition(fileless_manifest):
    folded = kfold_split(fileless_manifest, 5, seed=3)
    assert [r.id for r in folded] == [r.id for r in fileless_manifest]
    per_fold = Counter((r.split, r.signal_class) for r in folded)
    assert all(per_fold[(fold_name(f), c)] == 2 for f in range(5) for c in CLASS_ORDER)

    again = kfold_split(fileless_manifest, 5, seed=3)
    assert [r.split for r in again] == [r.split for r in folded]
    other = kfold_split(fileless_manifest, 5, seed=4)
    assert [r.split for r in other] != [r.split for r in folded]


def test_kfold_two_items_two_folds(record_factory):
    manifest = [record_factory(c, i) for c in CLASS_ORDER for i in range(2)]
    folded = kfold_split(manifest, 2)
    counts = Counter((r.split, r.signal_class) for r in folded)
    assert set(counts.values()) == {1}


def test_kfold_rejects_bad_k(fileless_manifest):
    with pytest.raises(InvalidArgumentError):
        kfold_split(fileless_manifest, 1)
    with pytest.raises(InvalidArgumentError):
        kfold_split(fileless_manifest, 11)


def test_kfold_leaves_test_records_alone(fileless_manifest, record_factory):
    manifest = fileless_manifest + [record_factory(SignalClass.noise, 99, split="test")]
    folded = kfold_split(manifest, 5)
    assert folded[-1].split == "test"


def test_sweep_fixes_amplitude_except_for_noise(tmp_path):
    records = generate_sweep(master_seed=2, per_class=1, amplitudes=[0.0, 0.1], out_dir=tmp_path)
    assert len(records) == 14
    assert all(r.split == "sweep" for r in records)
    for record in records:
        if record.signal_class is SignalClass.noise or record.sweep_amplitude == 0.0:
            assert record.params.A0 == 0.0
        else:
            assert record.params.A0 == pytest.approx(1.3)
    assert read_manifest(tmp_path) == records


def test_default_sweep_size():
    assert len(DEFAULT_SWEEP_AMPLITUDES) == 14
    assert len(DEFAULT_SWEEP_AMPLITUDES) * len(CLASS_ORDER) * 250 == 24_500
    assert list(DEFAULT_SWEEP_AMPLITUDES) == sorted(DEFAULT_SWEEP_AMPLITUDES)


def test_sweep_needs_amplitudes(tmp_path):
    with pytest.raises(InvalidArgumentError):
        generate_sweep(master_seed=0, per_class=1, amplitudes=[], out_dir=tmp_path)


def test_manifest_reports_bad_line(tmp_path, fileless_manifest):
    path = write_manifest(fileless_manifest[:3], tmp_path / "manifest.jsonl")
    with open(path, "a", encoding="utf-8") as handle:
        handle.write('{"id": "broken"}\n')
    with pytest.raises(DataError, match=":4:"):
        read_manifest(path)


def test_manifest_uses_class_names(tmp_path, fileless_manifest):
    path = write_manifest(fileless_manifest[:1], tmp_path / "manifest.jsonl")
    line = path.read_text().strip()
    assert '"class":"brightpixel"' in line.replace(" ", "")


def test_load_features_follows_manifest_order(tmp_path):
    spec = CorpusSpec(counts={SignalClass.noise: 1, SignalClass.narrowband: 2}, out_dir=tmp_path)
    records = generate_corpus(spec)
    reordered = list(reversed(records))
    features, labels, ids = load_features(reordered, tmp_path, SpectroConfig(), 48, 64, threads=2)
    assert features.shape == (3, 2, 48, 64)
    assert ids == [r.id for r in reordered]
    assert labels.tolist() == [r.signal_class.code for r in reordered]
