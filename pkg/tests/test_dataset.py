"""Dataset generation determinism, stratification, and the split study."""

import numpy as np
import pytest

from modviz.signals import CANONICAL_NAMES, Dataset, GenerationConfig, generate_dataset, split_samples

SMALL = GenerationConfig(
    schemes=("BPSK", "QPSK", "WBFM"),
    snrs_db=(10, 18),
    per_cell=20,
    n_x=64,
)


def test_default_plan_matches_published_counts():
    cfg = GenerationConfig()
    assert cfg.total_samples == 110_000
    assert len(cfg.schemes) == 11
    assert len(cfg.snrs_db) == 10
    quota = [int(cfg.total_samples * r) for r in cfg.split_ratios]
    assert quota == [88_000, 11_000, 11_000]


class TestGenerate:
    def test_deterministic_for_fixed_seed(self):
        a = generate_dataset(SMALL, seed=7)
        b = generate_dataset(SMALL, seed=7)
        np.testing.assert_array_equal(a.iq, b.iq)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.splits, b.splits)
        np.testing.assert_array_equal(a.seed_tags, b.seed_tags)

    def test_distinct_seeds_differ(self):
        a = generate_dataset(SMALL, seed=7)
        b = generate_dataset(SMALL, seed=8)
        assert not np.array_equal(a.iq, b.iq)

    def test_scheme_order_in_config_is_irrelevant(self):
        shuffled = GenerationConfig(
            schemes=("WBFM", "QPSK", "BPSK"),
            snrs_db=SMALL.snrs_db,
            per_cell=SMALL.per_cell,
            n_x=SMALL.n_x,
        )
        a = generate_dataset(SMALL, seed=3)
        b = generate_dataset(shuffled, seed=3)
        np.testing.assert_array_equal(a.iq, b.iq)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_every_cell_has_configured_count(self):
        ds = generate_dataset(SMALL, seed=1)
        counts = ds.cell_counts()
        assert len(counts) == 6
        assert set(counts.values()) == {SMALL.per_cell}

    def test_split_ratios_stratified_per_cell(self):
        ds = generate_dataset(SMALL, seed=1)
        for label in np.unique(ds.labels):
            for snr in np.unique(ds.snrs_db):
                cell = (ds.labels == label) & (ds.snrs_db == snr)
                codes = ds.splits[cell]
                assert (codes == 0).sum() == 16
                assert (codes == 1).sum() == 2
                assert (codes == 2).sum() == 2

    def test_unit_power_scale(self):
        ds = generate_dataset(SMALL, seed=2)
        high_snr = ds.snrs_db == 18
        powers = np.mean(np.abs(ds.iq[high_snr]) ** 2, axis=1)
        assert 0.8 < np.median(powers) < 1.3

    def test_labels_use_global_vocabulary(self):
        ds = generate_dataset(SMALL, seed=1)
        assert ds.label_names == CANONICAL_NAMES
        assert set(np.unique(ds.labels)) == {
            CANONICAL_NAMES.index("BPSK"),
            CANONICAL_NAMES.index("QPSK"),
            CANONICAL_NAMES.index("WBFM"),
        }

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            generate_dataset(
                GenerationConfig(schemes=("BPSK",), snrs_db=(0,), per_cell=0), seed=0
            )
        with pytest.raises(ValueError, match="grid"):
            GenerationConfig(schemes=("BPSK",), snrs_db=()).validate()
        with pytest.raises(ValueError, match="unknown"):
            GenerationConfig(schemes=("BPSK", "NOPE")).validate()


class TestSplitSamples:
    def test_halves_and_ordering(self):
        ds = generate_dataset(SMALL, seed=5)
        halved = split_samples(ds, factor=2)
        assert halved.n_x == ds.n_x // 2
        assert len(halved) == 2 * len(ds)
        k = 17
        np.testing.assert_array_equal(halved.iq[2 * k], ds.iq[k][: ds.n_x // 2])
        np.testing.assert_array_equal(halved.iq[2 * k + 1], ds.iq[k][ds.n_x // 2 :])
        assert halved.labels[2 * k] == halved.labels[2 * k + 1] == ds.labels[k]
        assert halved.snrs_db[2 * k] == ds.snrs_db[k]
        assert halved.splits[2 * k] == halved.splits[2 * k + 1] == ds.splits[k]

    def test_concatenating_halves_restores_original(self):
        ds = generate_dataset(SMALL, seed=5)
        halved = split_samples(ds, factor=2)
        rebuilt = halved.iq.reshape(len(ds), ds.n_x)
        np.testing.assert_array_equal(rebuilt, ds.iq)

    def test_indivisible_length_rejected(self):
        ds = Dataset(
            np.zeros((3, 7), dtype=np.complex64),
            np.zeros(3),
            np.zeros(3),
            np.zeros(3),
        )
        with pytest.raises(ValueError, match="divisible"):
            split_samples(ds, factor=2)
