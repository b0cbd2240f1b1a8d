"""Similarity matrix, symmetric loss, batching, and trainer invariants."""

import numpy as np
import pytest

import pimc
from pimc.contrastive import (
    PairDataset,
    TrainConfig,
    build_pair_dataset,
    make_pair_batches,
    pimc_loss,
    similarity_matrix,
    train,
)
from pimc.encoder import EncoderConfig
from pimc.errors import ConfigError, DomainError, ShapeError
from pimc.tensor import Tensor

from helpers import finite_difference, max_rel_error


def feats(shape, seed):
    return np.random.default_rng(seed).normal(size=shape).astype(np.float32)


class TestSimilarityMatrix:
    def test_self_similarity_diagonal_is_one(self):
        f = Tensor(feats((5, 7), 1))
        s = similarity_matrix(f, f, 1.0)
        assert np.allclose(np.diag(s.data), 1.0, atol=1e-6)

    def test_orthogonal_rows_give_zero(self):
        a = Tensor(np.eye(3, 5, dtype=np.float32))
        b = Tensor(np.eye(3, 5, k=3, dtype=np.float32) * 2.0)
        s = similarity_matrix(a, b, 1.0)
        assert np.max(np.abs(s.data)) < 1e-6

    def test_matches_brute_force_cosine(self):
        a = feats((5, 7), 2)
        b = feats((5, 7), 3)
        tau = 0.3
        s = similarity_matrix(Tensor(a), Tensor(b), tau)
        expected = np.empty((5, 5))
        for i in range(5):
            for j in range(5):
                expected[i, j] = (
                    np.dot(a[i], b[j]) / (np.linalg.norm(a[i]) * np.linalg.norm(b[j])) / tau
                )
        assert np.max(np.abs(s.data - expected)) < 1e-5

    def test_unscaled_entries_within_unit(self):
        s = similarity_matrix(Tensor(feats((8, 16), 4)), Tensor(feats((8, 16), 5)), 1.0)
        assert np.all(np.abs(s.data) <= 1.0 + 1e-6)

    def test_learnable_temperature_gets_gradient(self):
        tau = Tensor(np.float32(0.07), requires_grad=True)
        s = similarity_matrix(Tensor(feats((4, 8), 6)), Tensor(feats((4, 8), 7)), tau)
        pimc_loss(s).backward()
        assert tau.grad is not None and np.isfinite(tau.grad)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            similarity_matrix(Tensor(feats((4, 8), 8)), Tensor(feats((5, 8), 9)), 1.0)


class TestLoss:
    def test_zero_matrix_gives_log_b(self):
        loss = pimc_loss(Tensor(np.zeros((8, 8), dtype=np.float32)))
        assert abs(loss.item() - np.log(8.0)) < 1e-6

    def test_saturated_diagonal_gives_zero(self):
        loss = pimc_loss(Tensor(100.0 * np.eye(8, dtype=np.float32)))
        assert loss.item() < 1e-6

    def test_matches_float64_reference(self):
        s = feats((4, 4), 10) * 2.0

        def ce_rows(z):
            z = z.astype(np.float64)
            z = z - z.max(axis=1, keepdims=True)
            logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
            return -np.mean(np.diag(logp))

        expected = 0.5 * (ce_rows(s) + ce_rows(s.T))
        assert abs(pimc_loss(Tensor(s)).item() - expected) < 1e-6

    def test_transpose_symmetry_exact(self):
        for seed in range(5):
            s = feats((6, 6), 20 + seed) * 3.0
            a = pimc_loss(Tensor(s)).item()
            b = pimc_loss(Tensor(np.ascontiguousarray(s.T))).item()
            assert a == b

    def test_consistent_permutation_invariance(self):
        s = feats((7, 7), 30) * 2.0
        perm = np.random.default_rng(31).permutation(7)
        permuted = s[np.ix_(perm, perm)]
        assert abs(pimc_loss(Tensor(s)).item() - pimc_loss(Tensor(permuted)).item()) < 1e-6

    def test_gradient_matches_finite_differences(self):
        s0 = feats((5, 5), 32)

        def f(s):
            return pimc_loss(Tensor(s)).item()

        t = Tensor(s0, requires_grad=True)
        pimc_loss(t).backward()
        assert max_rel_error(finite_difference(f, s0), t.grad) < 1e-3

    def test_non_square_rejected(self):
        with pytest.raises(ShapeError):
            pimc_loss(Tensor(feats((4, 5), 33)))

    def test_role_swap_same_loss(self):
        a = Tensor(feats((6, 9), 34))
        b = Tensor(feats((6, 9), 35))
        forward = pimc_loss(similarity_matrix(a, b, 0.2)).item()
        swapped = pimc_loss(similarity_matrix(b, a, 0.2)).item()
        assert abs(forward - swapped) < 1e-7


def desk_dataset(seed=0, regions=1, pixels=2):
    cubes = [
        pimc.synth_cube(seed=400 + seed + i, classes=3, t=16, h=32, w=32, region_id=f"c{i}")[0]
        for i in range(regions)
    ]
    return build_pair_dataset(cubes, ps=16, pixels_per_patch=pixels, input_size=16, seed=seed)


class TestBatches:
    def test_epoch_covers_every_pair_once(self):
        ds = desk_dataset(pixels=3)
        seen = []
        for batch in make_pair_batches(ds, 3, seed=1, epoch=0):
            seen.extend(zip(batch.patch_keys, [tuple(p) for p in batch.pixels]))
        assert len(seen) == len(ds.entries)
        assert len(set(seen)) == len(ds.entries)

    def test_no_patch_repeats_within_batch(self):
        ds = desk_dataset(pixels=4)
        for batch in make_pair_batches(ds, 4, seed=2, epoch=1):
            assert len(set(batch.patch_keys)) == len(batch.patch_keys)

    def test_deterministic_under_seed_and_epoch(self):
        ds = desk_dataset(pixels=2)
        a = [b.pixels for b in make_pair_batches(ds, 2, seed=3, epoch=5)]
        b = [b.pixels for b in make_pair_batches(ds, 2, seed=3, epoch=5)]
        c = [b.pixels for b in make_pair_batches(ds, 2, seed=3, epoch=6)]
        assert a == b
        assert a != c

    def test_small_patch_count_warns(self, caplog):
        ds = desk_dataset(pixels=1)
        with caplog.at_level("WARNING"):
            list(make_pair_batches(ds, 64, seed=4, epoch=0))
        assert any("smaller" in r.message for r in caplog.records)


def tiny_train_config(**kw):
    defaults = dict(
        epochs=1,
        batch_size=4,
        seed=5,
        checkpoint_cadence=0,
        encoder=EncoderConfig(widths=(4, 8), blocks_per_stage=1, embed_dim=8, input_size=16),
    )
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestTrainLoop:
    def test_zero_lr_keeps_parameters(self):
        ds = desk_dataset()
        config = tiny_train_config(lr=1e-12, weight_decay=0.0)
        # Adam with lr ~ 0 must leave parameters numerically unchanged
        result = train(ds, config)
        fresh = pimc.init_encoder(config.encoder, seed=[config.seed, 1])
        for name, p in fresh.params().items():
            assert np.allclose(p.data, result.image_encoder.params()[name].data, atol=1e-7), name

    def test_loss_history_matches_steps(self):
        ds = desk_dataset()
        result = train(ds, tiny_train_config(epochs=2))
        assert len(result.state.loss_history) == result.state.step

    def test_bit_identical_histories_under_same_seed(self):
        ds = desk_dataset()
        a = train(ds, tiny_train_config(epochs=2))
        b = train(ds, tiny_train_config(epochs=2))
        assert a.state.loss_history == b.state.loss_history

    def test_writes_logs_and_checkpoints(self, tmp_path):
        ds = desk_dataset()
        out = tmp_path / "run"
        result = train(ds, tiny_train_config(), out_dir=str(out))
        assert (out / "loss.csv").exists()
        assert (out / "train_log.csv").exists()
        assert (out / "image_final.ckpt").exists()
        assert (out / "series_final.ckpt.json").exists()
        header = (out / "loss.csv").read_text().splitlines()[0]
        assert header == "step,epoch,loss,temperature"
        assert "image_final" in result.checkpoints

    def test_temperature_stays_clamped(self):
        ds = desk_dataset()
        result = train(ds, tiny_train_config(epochs=2, temp_init=0.001))
        assert 1e-3 <= result.state.temperature <= 100.0

    def test_input_size_mismatch_rejected(self):
        ds = desk_dataset()
        config = tiny_train_config(
            encoder=EncoderConfig(widths=(4, 8), blocks_per_stage=1, embed_dim=8, input_size=32)
        )
        with pytest.raises(ConfigError):
            train(ds, config)
