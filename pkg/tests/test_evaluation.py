"""
Unit tests for accuracy metrics, leave-one-day-out cross-validation and reports
"""

import json
import os
import shutil
import tempfile

import numpy as np
import pytest

from services.baseline import Dataset, DatasetMeta, EventWindow, FanSeries, TensorMethod, mask_event_windows
from services.errors import (
    InsufficientHistoryError, InvalidConfigError, LengthMismatchError, TooFewSlotsError, TooFewValuesError,
    ZeroMeanActualError,
)
from services.evaluation import (
    MethodSpec, aec, confidence_interval, cv, loocv, nmbe, run_study, write_study_reports,
)
from services.synth import SynthConfig, generate
from services.tensor import FitOptions, LossSpec, complete


def minute_dataset(config, event_day=False, values=None):
    """1-minute dataset repeating each synthetic slot per minute"""
    if values is None:
        values = generate(config).observed.values
    values = np.repeat(values, config.slot_minutes, axis=0)
    fans = [f"F{j + 1}" for j in range(config.N)]
    days = config.days
    meta = DatasetMeta(building='SYNTH', fan_ids=fans,
                       baseline_days=days[:-1] if event_day else days,
                       event_day=days[-1] if event_day else None)
    series = {(fan, day): FanSeries(fan, day, values[:, j, k]) for j, fan in enumerate(fans) for k, day in enumerate(days)}
    return Dataset(meta, series)


class TestMetrics:
    """Test cases for CV, NMBE, AEC and the confidence interval"""

    def setup_method(self):
        """Set up a hand-computed example"""
        self.actual = [10.0, 10.0, 10.0, 10.0]
        self.estimate = [12.0, 10.0, 10.0, 10.0]

    def test_hand_values(self):
        """Test one 2 kW overestimate in four 15-minute slots"""
        assert cv(self.estimate, self.actual) == pytest.approx(100 * np.sqrt(4 / 3) / 10)
        assert cv(self.estimate, self.actual) == pytest.approx(11.547, abs=1e-3)
        assert nmbe(self.estimate, self.actual) == pytest.approx(6.667, abs=1e-3)
        assert aec(self.estimate, self.actual, 15) == pytest.approx(0.5)

    def test_conventional_nmbe_divisor(self):
        """Test the |tau| divisor variant"""
        assert nmbe(self.estimate, self.actual, conventional=True) == pytest.approx(5.0)

    def test_perfect_estimate(self):
        """Test zero metrics for a perfect estimate"""
        assert cv(self.actual, self.actual) == 0.0
        assert nmbe(self.actual, self.actual) == 0.0
        assert aec(self.actual, self.actual, 15) == 0.0

    def test_constant_offset(self):
        """Test closed forms for a constant offset c"""
        rng = np.random.default_rng(0)
        actual = rng.uniform(1, 5, size=12)
        c, n, mean = 0.3, 12, actual.mean()

        assert cv(actual + c, actual) == pytest.approx(100 * c * np.sqrt(n / (n - 1)) / mean)
        assert nmbe(actual + c, actual) == pytest.approx(100 * c * n / ((n - 1) * mean))
        assert aec(actual + c, actual, 5) == pytest.approx(c * n * 5 / 60)

    def test_matches_brute_force(self):
        """Test against explicit loops on random inputs"""
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            actual = rng.uniform(0.5, 5, size=n)
            estimate = actual + rng.normal(0, 0.5, size=n)
            mean = sum(actual) / n
            squares = sum((e - a) ** 2 for e, a in zip(estimate, actual))
            bias = sum(e - a for e, a in zip(estimate, actual))

            assert cv(estimate, actual) == pytest.approx(100 * (squares / (n - 1)) ** 0.5 / mean, rel=1e-12)
            assert nmbe(estimate, actual) == pytest.approx(100 * bias / (n - 1) / mean, rel=1e-9, abs=1e-9)

    def test_aec_sign(self):
        """Test that underestimation gives negative AEC"""
        assert aec([1.0, 1.0], [2.0, 2.0], 30) == pytest.approx(-1.0)

    def test_invalid_inputs(self):
        """Test zero-mean actuals, length mismatch and single slots"""
        with pytest.raises(ZeroMeanActualError):
            cv([1.0, 1.0], [1.0, -1.0])
        with pytest.raises(LengthMismatchError):
            nmbe([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(TooFewSlotsError):
            cv([1.0], [1.0])

    def test_confidence_interval(self):
        """Test the 1.96 * s / sqrt(n) half-width"""
        mean, half_width = confidence_interval([1.0, 2.0, 3.0])

        assert mean == 2.0
        assert half_width == pytest.approx(1.96 / np.sqrt(3))
        assert confidence_interval([4.0, 4.0]) == (4.0, 0.0)

        with pytest.raises(TooFewValuesError):
            confidence_interval([1.0])


class TestLoocv:
    """Test cases for leave-one-day-out cross-validation"""

    def setup_method(self):
        """Set up an 8-day noiseless rank-2 dataset at 1-minute resolution"""
        self.config = SynthConfig(T=96, N=3, S=8, rank=2, seed=11)
        self.dataset = minute_dataset(self.config)
        self.options = FitOptions(rank=2, trials=4, seed=3, max_iterations=2000, gradient_tolerance=1e-9)

    def test_benchmark_fold_counts(self):
        """Test covered and skipped folds for each benchmark"""
        days = self.dataset.meta.baseline_days
        expected = {'linterp': 8, 'avg5': 3, 'n3of6': 2}

        for method, covered in expected.items():
            spec = MethodSpec(method, 15)
            report = loocv(self.dataset, spec)

            assert len(report.covered[spec.key]) == covered
            assert len(report.skipped[spec.key]) == 8 - covered
            assert report.covered[spec.key] == days[8 - covered:]
            assert len(report.results) == 2 * covered

    def test_benchmark_key_ignores_mode_and_loss(self):
        """Test that benchmarks report under mode 'total' and loss 'none'"""
        report = run_study(self.dataset, [MethodSpec('avg5', 15, 'per_fan', 'huber'),
                                          MethodSpec('avg5', 15, 'total', 'l2')])

        assert list(report.covered) == [('avg5', 15, 'total', 'none')]
        assert len(report.results) == 6

    def test_tensor_recovers_noiseless_low_rank_data(self):
        """Test mean CV below 1% on noiseless rank-2 data"""
        spec = MethodSpec('tensor', 15, 'per_fan', 'l2')

        report = loocv(self.dataset, spec, self.options)

        assert len(report.covered[spec.key]) == 8
        assert len(report.results) == 16
        assert report.mean_metric('tensor', 'cv') < 1.0

    def test_deterministic_across_runs_and_threads(self):
        """Test identical fold metrics for the same seed, serial or threaded"""
        spec = MethodSpec('tensor', 30, 'per_fan', 'huber')
        options = FitOptions(rank=2, trials=2, seed=5, max_iterations=60)

        first = loocv(self.dataset, spec, options)
        second = loocv(self.dataset, spec, options)
        threaded = loocv(self.dataset, spec, options, threads=3)

        for other in (second, threaded):
            assert [(r.day, r.window, r.cv, r.nmbe, r.aec) for r in other.results] == \
                [(r.day, r.window, r.cv, r.nmbe, r.aec) for r in first.results]

    def test_fold_mask_hides_held_out_windows(self):
        """Test that the held-out day's windows are unobserved for every fan"""
        method = TensorMethod(15, 'per_fan', 'huber', 0.25, self.options)
        day = self.dataset.meta.baseline_days[3]

        mask = method.fold_mask(self.dataset, day)

        assert mask.unobserved_count == 2 * 8 * 3
        assert not mask.observed[36:44, :, 3].any()
        assert not mask.observed[52:60, :, 3].any()

    def corrupt_windows(self, day):
        """Copy of the dataset with the day's event-window readings changed"""
        series = dict(self.dataset.series)
        for fan in self.dataset.meta.fan_ids:
            values = series[(fan, day)].values.copy()
            values[540:660] *= 10
            values[780:900] = 0.0
            series[(fan, day)] = FanSeries(fan, day, values)
        return Dataset(self.dataset.meta, series)

    def test_held_out_window_data_is_never_used(self):
        """Test that corrupting held-out window readings leaves the estimate unchanged"""
        day = self.dataset.meta.baseline_days[2]
        corrupted = self.corrupt_windows(day)
        options = FitOptions(rank=2, trials=2, seed=1, max_iterations=50)

        clean = TensorMethod(15, 'per_fan', 'huber', 0.25, options).estimate_day(self.dataset, day, seed=7)
        dirty = TensorMethod(15, 'per_fan', 'huber', 0.25, options).estimate_day(corrupted, day, seed=7)

        for label in clean:
            np.testing.assert_array_equal(clean[label], dirty[label])

    def test_scaled_delta_ignores_held_out_windows(self):
        """Test that a data-scaled Huber delta is computed without the held-out window readings"""
        day = self.dataset.meta.baseline_days[2]
        corrupted = self.corrupt_windows(day)
        options = FitOptions(rank=2, trials=2, seed=1, max_iterations=50)

        clean = TensorMethod(15, 'per_fan', 'huber', 0.25, options, delta_scaled=0.25)
        dirty = TensorMethod(15, 'per_fan', 'huber', 0.25, options, delta_scaled=0.25)
        clean_estimate = clean.estimate_day(self.dataset, day, seed=7)
        dirty_estimate = dirty.estimate_day(corrupted, day, seed=7)

        for label in clean_estimate:
            np.testing.assert_array_equal(clean_estimate[label], dirty_estimate[label])

    def test_prepared_tensor_follows_dataset(self):
        """Test that a method reused on another dataset rebuilds its tensor"""
        method = TensorMethod(15, 'per_fan', 'l2', 0.25, self.options)
        other = self.corrupt_windows(self.dataset.meta.baseline_days[2])

        method.prepare(self.dataset)
        first = method._prepared[1]
        method.prepare(other)

        assert method._prepared[0] is other
        assert not np.array_equal(method._prepared[1].values, first.values)

    def test_actual_series_at_report_resolution(self):
        """Test that the actual values are the held-out day's aggregated totals"""
        spec = MethodSpec('linterp', 15)
        report = loocv(self.dataset, spec)
        result = report.results[0]
        total = self.dataset.total_power(result.day)

        assert result.window == 'morning'
        np.testing.assert_allclose(result.actual, total[540:660].reshape(8, 15).mean(axis=1), rtol=1e-12)
        np.testing.assert_array_equal(result.minute_of_day, 540 + 15 * np.arange(8))

    def test_aggregates(self):
        """Test per-group means, standard deviations and counts"""
        report = loocv(self.dataset, MethodSpec('n3of6', 15))
        rows = {(row.window, row.metric): row for row in report.aggregates()}

        cv_row = rows[('morning', 'cv')]
        values = [r.cv for r in report.results if r.window == 'morning']
        assert cv_row.n == 2
        assert cv_row.mean == pytest.approx(np.mean(values))
        assert cv_row.std == pytest.approx(np.std(values, ddof=1))
        assert rows[('morning', 'aec')].ci_half_width is not None
        assert rows[('morning', 'cv')].ci_half_width is None

    def test_tensor_needs_two_days(self):
        """Test that a single baseline day cannot be cross-validated"""
        meta = self.dataset.meta.with_days(self.dataset.meta.baseline_days[:1])

        with pytest.raises(InsufficientHistoryError):
            loocv(Dataset(meta, self.dataset.series), MethodSpec('tensor', 15))

    def test_invalid_spec(self):
        """Test that unknown methods and resolutions are rejected"""
        with pytest.raises(InvalidConfigError):
            MethodSpec('median', 15)
        with pytest.raises(InvalidConfigError):
            MethodSpec('tensor', 10)


class TestStudyReports:
    """Test cases for study report files"""

    def setup_method(self):
        """Set up a temporary directory and a small dataset"""
        self.temp_dir = tempfile.mkdtemp()
        self.dataset = minute_dataset(SynthConfig(T=48, N=2, S=7, rank=1, seed=2))

    def teardown_method(self):
        """Clean up the temporary directory"""
        shutil.rmtree(self.temp_dir)

    def run(self):
        return run_study(self.dataset, [MethodSpec('linterp', 30), MethodSpec('avg5', 30)])

    def test_files_written(self):
        """Test the report file set and JSON layout"""
        paths = write_study_reports(self.run(), os.path.join(self.temp_dir, 'out'), {'seed': 0})

        assert set(paths) == {'json', 'csv', 'summary', 'plot_data'}
        for path in paths.values():
            assert os.path.isfile(path)

        with open(paths['json']) as handle:
            payload = json.load(handle)
        assert set(payload) == {'config', 'ashrae_guideline_14', 'aggregates', 'folds', 'coverage'}
        assert payload['ashrae_guideline_14']['enforced'] is False
        assert payload['coverage']['avg5/30/total/none']['covered'] == ['2017-06-10', '2017-06-11']
        assert len(payload['coverage']['avg5/30/total/none']['skipped']) == 5

    def test_byte_identical_reruns(self):
        """Test that identical runs write identical bytes"""
        first = write_study_reports(self.run(), os.path.join(self.temp_dir, 'a'), {'seed': 0})
        second = write_study_reports(self.run(), os.path.join(self.temp_dir, 'b'), {'seed': 0})

        for name in first:
            with open(first[name], 'rb') as a, open(second[name], 'rb') as b:
                assert a.read() == b.read()

    def test_csv_layout(self):
        """Test the long-format report rows"""
        paths = write_study_reports(self.run(), self.temp_dir)

        with open(paths['csv']) as handle:
            lines = handle.read().splitlines()
        assert lines[0] == 'method,resolution,mode,loss,day,window,metric,value'
        # linterp: 7 days x 2 windows x 3 metrics, avg5: 2 days x 2 windows x 3 metrics
        assert len(lines) == 1 + 42 + 12


class TestRecoveryAndComparisons:
    """Test cases for completion accuracy and the method comparisons over seed sweeps"""

    windows = [EventWindow(36, 43, 'morning', 15), EventWindow(52, 59, 'afternoon', 15)]

    def complete_event_day(self, rank):
        """Hide both windows on the last of 20 noiseless days and complete at the true rank"""
        truth = generate(SynthConfig(T=96, N=4, S=20, rank=rank, seed=rank)).truth
        mask = mask_event_windows(truth.dims, 19, self.windows)
        options = FitOptions(rank=rank, trials=4, seed=0, max_iterations=3000, gradient_tolerance=1e-10)

        completed, _ = complete(truth, mask, LossSpec.squared_error(), options)

        hidden = ~mask.observed
        return np.max(np.abs(completed.values[hidden] - truth.values[hidden]) / truth.values[hidden])

    def test_rank_one_window_recovery(self):
        """Test relative error below 1e-3 on every hidden rank-1 entry"""
        assert self.complete_event_day(1) < 1e-3

    def test_rank_two_window_recovery(self):
        """Test relative error below 1e-2 on every hidden rank-2 entry"""
        assert self.complete_event_day(2) < 1e-2

    def test_huber_resists_outliers(self):
        """Test Huber mean CV at most half the squared-error CV with 10x peak outliers"""
        wins = 0
        for seed in range(3):
            config = SynthConfig(T=48, N=2, S=6, rank=2, outlier_count=3, seed=seed)
            dataset = minute_dataset(config)
            options = FitOptions(rank=2, trials=2, seed=seed, max_iterations=500)
            report = run_study(dataset, [MethodSpec('tensor', 30, 'per_fan', 'huber', delta_scaled=0.25),
                                         MethodSpec('tensor', 30, 'per_fan', 'l2')], options)

            huber = report.mean_metric('tensor', 'cv', loss='huber')
            squared = report.mean_metric('tensor', 'cv', loss='l2')
            wins += huber <= 0.5 * squared

        assert wins >= 2

    def test_aggregated_resolution_beats_minute_noise(self):
        """Test 15-minute mean CV at most the 1-minute CV on noisy 1-minute data"""
        wins = 0
        for seed in range(3):
            config = SynthConfig(T=1440, N=2, S=4, rank=2, noise_std=0.3, seed=seed)
            dataset = minute_dataset(config)
            options = FitOptions(rank=2, trials=1, seed=seed, max_iterations=150)
            report = run_study(dataset, [MethodSpec('tensor', 15, 'per_fan', 'l2'),
                                         MethodSpec('tensor', 1, 'per_fan', 'l2')], options)

            wins += report.mean_metric('tensor', 'cv', resolution=15) <= \
                report.mean_metric('tensor', 'cv', resolution=1)

        assert wins >= 2

    def test_per_fan_beats_total(self):
        """Test per-fan mean CV at most the fan-summed CV when fans differ in scale"""
        wins = 0
        for seed in range(5):
            config = SynthConfig(T=96, N=2, S=6, rank=2, noise_std=0.3, fan_scales=[0.3, 1.7], seed=seed)
            synthetic = generate(config)
            values = np.array(synthetic.observed.values)
            # noiseless window readings
            for window in self.windows:
                rows = slice(window.start_slot, window.end_slot + 1)
                values[rows] = synthetic.truth.values[rows]
            dataset = minute_dataset(config, values=values)
            options = FitOptions(rank=2, trials=2, seed=seed, max_iterations=300)
            report = run_study(dataset, [MethodSpec('tensor', 15, 'per_fan', 'l2'),
                                         MethodSpec('tensor', 15, 'total', 'l2')], options)

            wins += report.mean_metric('tensor', 'cv', mode='per_fan') <= \
                report.mean_metric('tensor', 'cv', mode='total')

        assert wins >= 3
