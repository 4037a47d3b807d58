"""Exit criteria. One test per criterion; the terminal summary prints a PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import time
import warnings

import numpy as np
import pytest

import oracles
from conftest import SYNTH_SAMPLES, SYNTH_SEED
from nilmknn.errors import DataWarning
from nilmknn.harness import ExperimentConfig, render_report, run_experiment, stratified_split
from nilmknn.knn import KnnModel, class_probabilities, predict
from nilmknn.metrics import (
    ClassMetrics,
    OneVsRestCounts,
    build_confusion,
    f_measure,
    g_mean,
    macro_average,
    overall_accuracy,
    per_class_metrics,
    row_normalize,
)
from nilmknn.preprocess import build_dataset
from nilmknn.redd import PowerTrace, parse_channel, write_channel
from nilmknn.synth import DEFAULT_PROFILES, generate_corpus


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# Channel-wise rows: (precision, recall) -> reference (F-measure, G-mean).
TABLE_ROWS = [
    ("Furnace", (1.0, 1.0), (1.000, 1.000)),
    ("Bath GFI", (0.917, 0.917), (0.917, 0.917)),
    ("Oven", (0.9, 0.9), (0.900, 0.900)),
    ("Electronics", (1.0, 0.5), (0.667, 0.707)),
]
# Counts realising each (precision, recall) pair exactly.
TABLE_COUNTS = {
    "Furnace": OneVsRestCounts(tp=5, fp=0, fn=0, tn=40),
    "Bath GFI": OneVsRestCounts(tp=917, fp=83, fn=83, tn=4000),
    "Oven": OneVsRestCounts(tp=9, fp=1, fn=1, tn=40),
    "Electronics": OneVsRestCounts(tp=1, fp=0, fn=1, tn=40),
}
F_COLUMN = [1.00, 0.917, 0.900, 0.667, 1.00, 1.00, 1.00]
G_COLUMN = [1.00, 0.917, 0.900, 0.707, 1.00, 1.00, 1.00]


def test_ac1_table_per_class_arithmetic(record_property):
    worst = 0.0
    for name, (p, r), (f_exp, g_exp) in TABLE_ROWS:
        m = per_class_metrics(TABLE_COUNTS[name])
        assert (m.precision, m.recall) == pytest.approx((p, r), abs=1e-12)
        for got, want in ((m.f_measure, f_exp), (m.g_mean, g_exp), (f_measure(p, r), f_exp), (g_mean(p, r), g_exp)):
            worst = max(worst, abs(got - want))
            assert got == pytest.approx(want, abs=1e-3), name
    record_property("detail", f"max |deviation| {worst:.2e} <= 1e-3")


def test_ac2_table_overall_row(record_property):
    per = [ClassMetrics(0.0, 0.0, f, g) for f, g in zip(F_COLUMN, G_COLUMN)]
    macro_f, macro_g = macro_average(per)
    assert macro_f == pytest.approx(0.926, abs=5e-4)
    assert macro_g == pytest.approx(0.932, abs=5e-4)
    record_property("detail", f"macro F {macro_f:.5f}, macro G {macro_g:.5f}")


def _instance(gen, integer):
    n = int(gen.integers(5, 201))
    dim = int(gen.integers(1, 9))
    n_classes = int(gen.integers(2, 8))
    if integer:
        pts = gen.integers(-3, 4, (n, dim)).astype(float)
        queries = gen.integers(-3, 4, (100, dim)).astype(float)
    else:
        pts = gen.normal(size=(n, dim)) * gen.uniform(0.1, 100)
        queries = gen.normal(size=(100, dim)) * gen.uniform(0.1, 100)
    return pts, gen.integers(0, n_classes, n), n_classes, queries


def test_ac3_knn_oracle_equivalence(record_property):
    gen = np.random.default_rng(31337)
    agree = total = 0
    with Timer() as t:
        for inst in range(50):
            # Alternate coarse integer grids (many exact ties) and continuous data.
            pts, labels, n_classes, queries = _instance(gen, integer=inst % 2 == 0)
            k = [1, 3, 5][inst % 3]
            model = KnnModel(pts, labels, n_classes)
            expected = oracles.knn_vote_many(pts.tolist(), labels.tolist(), queries.tolist(), k)
            for q, want in zip(queries, expected):
                total += 1
                agree += predict(model, q, k) == want
    record_property("detail", f"{agree}/{total} agree in {t.elapsed:.2f}s")
    assert agree == total == 5000
    assert t.elapsed < 5.0


def test_ac4_simplex_and_votes(record_property):
    gen = np.random.default_rng(4)
    pts = gen.normal(size=(150, 4))
    labels = gen.integers(0, 6, 150)
    model = KnnModel(pts, labels, 6)
    worst = 0.0
    with Timer() as t:
        for i in range(1000):
            q = gen.normal(size=4)
            k = [1, 3, 5, 7][i % 4]
            probs = class_probabilities(model, q, k)
            worst = max(worst, abs(probs.sum() - 1.0))
            assert abs(probs.sum() - 1.0) <= 1e-12
            assert np.all(np.abs(probs * k - np.round(probs * k)) <= 1e-12)
            nearest = int(np.argmin(np.sqrt(((pts - q) ** 2).sum(axis=1))))
            assert predict(model, q, 1) == labels[nearest]
    record_property("detail", f"max |sum-1| {worst:.1e}, {t.elapsed:.2f}s")
    assert t.elapsed < 2.0


def test_ac5_metric_inequalities(record_property):
    gen = np.random.default_rng(5)
    pairs = [tuple(gen.uniform(0, 1, 2)) for _ in range(900)]
    pairs += [(p, p) for p in gen.uniform(0, 1, 100)]
    equal_cases = 0
    for p, r in pairs:
        f, g = f_measure(p, r), g_mean(p, r)
        assert g >= f
        if abs(p - r) < 1e-12:
            equal_cases += 1
            assert g == f
        else:
            assert g > f
    record_property("detail", f"1000 pairs, {equal_cases} with P == R")
    assert len(pairs) == 1000


def _random_trace(gen):
    n = int(gen.integers(0, 400))
    ts = int(gen.integers(0, 2**33)) + np.cumsum(gen.integers(1, 30, n))
    kind = int(gen.integers(0, 4))
    if kind == 0:
        p = gen.uniform(0, 5000, n)
    elif kind == 1:
        p = np.round(gen.exponential(200, n), 2)
    elif kind == 2:
        p = gen.exponential(1, n) * 10.0 ** gen.integers(-12, 12, n)
    else:
        p = np.where(gen.random(n) < 0.5, 0.0, gen.integers(0, 3000, n).astype(float))
    return PowerTrace(int(gen.integers(1, 30)), ts, p)


def test_ac6_ingest_round_trip(record_property):
    gen = np.random.default_rng(6)
    with Timer() as t:
        for _ in range(100):
            trace = _random_trace(gen)
            back = parse_channel(write_channel(trace), trace.channel)
            assert back == trace
            assert back.timestamps.tobytes() == trace.timestamps.tobytes()
            assert back.powers.tobytes() == trace.powers.tobytes()
    record_property("detail", f"100 traces bit-exact in {t.elapsed:.2f}s")
    assert t.elapsed < 2.0


def test_ac7_end_to_end_synthetic(tmp_path, record_property):
    with Timer() as t:
        house = generate_corpus(DEFAULT_PROFILES, SYNTH_SAMPLES, SYNTH_SEED, tmp_path / "house_1")
        cfg = ExperimentConfig(
            house_dirs=[str(house)],
            channel_selection={p.name: [(0, i + 1)] for i, p in enumerate(DEFAULT_PROFILES)},
            window_len=50,
            k=5,
            train_frac=0.9,
            seed=12345,
        )
        first = render_report(run_experiment(cfg), "json")
        second = render_report(run_experiment(cfg), "json")
        report = run_experiment(cfg)
    record_property("detail", f"macro F {report.macro_f:.4f} on {report.confusion.total} test windows, {t.elapsed:.2f}s")
    assert report.macro_f >= 0.95
    assert first == second
    assert t.elapsed < 10.0


def test_ac8_split_properties(record_property):
    gen = np.random.default_rng(8)
    with Timer() as t, warnings.catch_warnings():
        warnings.simplefilter("ignore", DataWarning)
        for _ in range(50):
            counts = gen.integers(1, 60, int(gen.integers(1, 8)))
            ds = build_dataset({f"c{i}": [np.zeros(2)] * int(c) for i, c in enumerate(counts)})
            frac = float(gen.uniform(0.05, 0.95))
            seed = int(gen.integers(0, 2**63))
            s = stratified_split(ds, frac, seed)
            again = stratified_split(ds, frac, seed)
            tr, te = set(s.train.tolist()), set(s.test.tolist())
            assert not tr & te and tr | te == set(range(len(ds)))
            for c, n in enumerate(counts):
                assert abs(np.sum(ds.labels[s.train] == c) - n * frac) <= 1
            assert np.array_equal(s.train, again.train) and np.array_equal(s.test, again.test)
    record_property("detail", f"50 random datasets in {t.elapsed:.2f}s")
    assert t.elapsed < 1.0


def test_ac9_confusion_bookkeeping(record_property):
    gen = np.random.default_rng(9)
    with Timer() as t:
        for _ in range(200):
            n_classes = int(gen.integers(1, 8))
            size = int(gen.integers(1, 300))
            y_true = gen.integers(0, n_classes, size)
            y_pred = np.where(gen.random(size) < 0.7, y_true, gen.integers(0, n_classes, size))
            c = build_confusion(y_true, y_pred, tuple(f"c{i}" for i in range(n_classes)))
            assert c.total == size
            acc, err = overall_accuracy(c)
            assert acc == np.mean(y_true == y_pred)
            assert err == 1 - acc
            sums = row_normalize(c).sum(axis=1)
            assert np.all((np.abs(sums - 1) <= 1e-12) | (sums == 0))
    record_property("detail", f"200 random label vectors in {t.elapsed:.2f}s")
    assert t.elapsed < 1.0
