import math

import numpy as np
import pytest

from lowrankbp.core import GaussianModel, Subspace
from lowrankbp.exceptions import EmptyReportError
from lowrankbp.generators import LargeSpike, RandomSign, sample_instance
from lowrankbp.pipeline import (
    PipelineConfig,
    RecoveryReport,
    estimate_coord_bound,
    estimate_mean,
    load_report,
    recover_dataset,
    save_report,
)


def axis_model(d, k, mean=None, scale=1.0):
    factor = np.zeros((k, d))
    factor[:, :k] = np.eye(k) * scale
    return GaussianModel(np.zeros(d) if mean is None else mean, factor)


class TestRecoverDataset:
    def test_no_corruption_recovers_exactly(self):
        rng = np.random.default_rng(60)
        factor = rng.standard_normal((3, 25))
        model = GaussianModel(np.zeros(25), factor)
        inst = sample_instance(model, 30, 0, RandomSign(1.0), seed=61)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(
            inst.corrupted, config, coord_bound=model.coord_bound, clean=inst.clean
        )
        assert float(np.max(np.abs(report.estimates - inst.clean))) < 1e-7
        assert float(np.max(report.per_point_l1)) < 1e-6

    def test_truncation_never_touches_clean_data(self):
        # across 100 seeded trials, clipping with the default multiplier is a
        # no-op on uncorrupted gaussian data
        total_modified = 0
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            factor = rng.standard_normal((2, 15))
            model = GaussianModel(np.zeros(15), factor)
            inst = sample_instance(model, 40, 0, RandomSign(1.0), seed=seed)
            config = PipelineConfig(subspace_override=inst.subspace)
            report = recover_dataset(inst.corrupted, config, coord_bound=model.coord_bound)
            radius = report.clip_radius
            med = report.coordinate_medians
            clipped = np.clip(inst.corrupted, med - radius, med + radius)
            total_modified += int(np.sum(clipped != inst.corrupted))
        assert total_modified == 0

    def test_axis_case_error_is_corruption_on_informative_coords(self):
        model = axis_model(30, 3)
        inst = sample_instance(model, 50, 4, RandomSign(1.0), seed=62)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(
            inst.corrupted, config, coord_bound=1.0, clean=inst.clean
        )
        for i, sup in enumerate(inst.supports):
            informative_hits = sum(1 for e in sup.elements if e <= 3)
            assert report.per_point_l1[i] == pytest.approx(
                float(informative_hits), abs=1e-7
            )

    def test_spikes_are_clipped_to_window(self):
        rng = np.random.default_rng(63)
        factor = rng.standard_normal((2, 20))
        model = GaussianModel(np.zeros(20), factor)
        inst = sample_instance(model, 60, 2, LargeSpike(1e9), seed=64)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(
            inst.corrupted, config, coord_bound=model.coord_bound, clean=inst.clean
        )
        # without clipping a 1e9 spike would push the l1 error to ~1e9
        assert float(np.max(report.per_point_l1)) < 100.0

    def test_learns_subspace_when_not_overridden(self):
        rng = np.random.default_rng(65)
        factor = rng.standard_normal((2, 30))
        model = GaussianModel(np.zeros(30), factor)
        inst = sample_instance(model, 800, 1, RandomSign(1.0), seed=66)
        report = recover_dataset(inst.corrupted, coord_bound=model.coord_bound,
                                 clean=inst.clean)
        assert report.subspace_used.dim == 2
        assert float(np.mean(report.per_point_l1)) < 0.5

    def test_estimates_stay_in_subspace(self):
        rng = np.random.default_rng(67)
        factor = rng.standard_normal((3, 12))
        model = GaussianModel(np.zeros(12), factor)
        inst = sample_instance(model, 15, 2, RandomSign(1.0), seed=68)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(inst.corrupted, config, coord_bound=1.0)
        basis = inst.subspace.basis
        for row in report.estimates:
            resid = row - basis @ (basis.T @ row)
            assert np.linalg.norm(resid) < 1e-7

    def test_mad_bound_estimate_path(self):
        rng = np.random.default_rng(69)
        factor = rng.standard_normal((2, 10))
        model = GaussianModel(np.zeros(10), factor)
        inst = sample_instance(model, 40, 1, RandomSign(1.0), seed=70)
        estimated = estimate_coord_bound(inst.corrupted)
        assert 0.1 * model.coord_bound < estimated < 10 * model.coord_bound
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(inst.corrupted, config)  # no coord_bound given
        assert np.isfinite(report.clip_radius)

    def test_mean_error_triangle_decomposition(self):
        rng = np.random.default_rng(71)
        factor = rng.standard_normal((2, 20))
        mean = rng.standard_normal(20)
        model = GaussianModel(mean, factor)
        inst = sample_instance(model, 100, 2, RandomSign(1.0), seed=72,
                               include_mean_in_subspace=True)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(
            inst.corrupted, config, coord_bound=model.coord_bound,
            clean=inst.clean, true_mean=mean,
        )
        clean_mean_dev = float(np.sum(np.abs(inst.clean.mean(axis=0) - mean)))
        assert report.mean_l1_error <= float(np.mean(report.per_point_l1)) + clean_mean_dev + 1e-9


class TestEstimateMean:
    def test_single_row(self):
        sub = Subspace.axis_aligned(3, 1)
        row = np.array([[2.0, 0.0, 0.0]])
        report = RecoveryReport(row, None, row[0], None, sub, np.zeros(3), 1.0)
        assert np.allclose(estimate_mean(report), row[0])

    def test_constant_rows(self):
        sub = Subspace.axis_aligned(3, 1)
        rows = np.tile([1.5, 0.0, 0.0], (5, 1))
        report = RecoveryReport(rows, None, rows[0], None, sub, np.zeros(3), 1.0)
        assert np.allclose(estimate_mean(report), [1.5, 0.0, 0.0])

    def test_empty_report(self):
        sub = Subspace.axis_aligned(3, 1)
        report = RecoveryReport(
            np.zeros((0, 3)), None, np.zeros(3), None, sub, np.zeros(3), 1.0
        )
        with pytest.raises(EmptyReportError):
            estimate_mean(report)

    def test_folded_gaussian_mean_oracle(self):
        # clean data, no corruption: ||mean_estimate||_1 concentrates at
        # sum_j sigma_j sqrt(2/(pi n))
        rng = np.random.default_rng(73)
        d, n = 50, 2000
        factor = rng.standard_normal((3, d))
        model = GaussianModel(np.zeros(d), factor)
        inst = sample_instance(model, n, 0, RandomSign(1.0), seed=74)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(inst.corrupted, config, coord_bound=model.coord_bound)
        sigmas = np.sqrt(np.sum(model.factor**2, axis=0))
        expected = float(np.sum(sigmas)) * math.sqrt(2.0 / (math.pi * n))
        got = float(np.sum(np.abs(report.mean_estimate)))
        spread = math.sqrt(float(np.sum(sigmas**2)) * (1 - 2 / math.pi) / n)
        assert abs(got - expected) <= 6 * spread

    def test_median_aggregation_flag(self):
        rng = np.random.default_rng(75)
        factor = rng.standard_normal((2, 8))
        model = GaussianModel(np.zeros(8), factor)
        inst = sample_instance(model, 21, 0, RandomSign(1.0), seed=76)
        config = PipelineConfig(subspace_override=inst.subspace, mean_method="median")
        report = recover_dataset(inst.corrupted, config, coord_bound=1.0)
        assert np.allclose(
            report.mean_estimate, np.median(report.estimates, axis=0), atol=1e-12
        )


class TestReportSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(77)
        factor = rng.standard_normal((2, 6))
        model = GaussianModel(np.zeros(6), factor)
        inst = sample_instance(model, 9, 1, RandomSign(1.0), seed=78)
        config = PipelineConfig(subspace_override=inst.subspace)
        report = recover_dataset(
            inst.corrupted, config, coord_bound=1.0, clean=inst.clean,
            true_mean=np.zeros(6),
        )
        path = tmp_path / "report.json"
        save_report(report, path)
        loaded = load_report(path)
        assert np.array_equal(loaded.estimates, report.estimates)
        assert np.allclose(loaded.mean_estimate, report.mean_estimate)
        assert loaded.mean_l1_error == pytest.approx(report.mean_l1_error)
        assert np.allclose(loaded.per_point_l1, report.per_point_l1)
        assert loaded.clip_radius == pytest.approx(report.clip_radius)


class TestConfigValidation:
    def test_multiplier_positive(self):
        with pytest.raises(ValueError):
            PipelineConfig(truncation_radius_multiplier=0.0)

    def test_mean_method_checked(self):
        with pytest.raises(ValueError):
            PipelineConfig(mean_method="mode")
