"""Acceptance criteria AC1-AC11.

Each test records one ``ACn: PASS|FAIL | detail`` line (collected into the
pytest terminal summary by ``conftest.py``) and then asserts the criterion
at its stated tolerance. Run alone with::

    pytest tests/test_acceptance.py -v
"""

import struct
import time

import numpy as np
import pytest
from scipy import stats

from conftest import record
from ddlab.data import (
    Dataset,
    LabelNoiseSpec,
    apply_label_noise,
    data_dir_from_env,
    fashion_mnist_paths,
    load_idx,
    parse_idx,
)
from ddlab.emc import TrainingProcedure, estimate_emc
from ddlab.exceptions import FormatError
from ddlab.solver import (
    SolverSpec,
    evaluate,
    gd_closed_form,
    gd_iterative,
    min_norm_solve,
    ridge_solve,
)
from ddlab.sweep import (
    SweepSpec,
    SyntheticSource,
    ensemble_run,
    locate_peak,
    pooled_std,
    run_epoch_wise,
    run_grid,
    run_model_wise,
    run_ridge_sweep,
    run_sample_wise,
    to_csv,
    to_document,
)

pytestmark = pytest.mark.acceptance

REPS = 5


def geom_ints(lo, hi, k):
    return tuple(sorted({int(round(v)) for v in np.geomspace(lo, hi, k)}))


def test_ac1_grid_ridge_follows_diagonal():
    spec = SweepSpec(model_dims=geom_ints(20, 3200, 16), sample_sizes=(100, 200, 400, 800),
                     noise_levels=(0.1,), replicates=REPS)
    t0 = time.perf_counter()
    res = run_grid(spec)
    elapsed = time.perf_counter() - t0
    argmax = {}
    for n in spec.sample_sizes:
        curve = res.curve("n_features", "test_mse", n_samples=n)
        argmax[n] = max(curve, key=lambda c: c[1])[0]
    inside = all(0.8 * n <= d <= 1.25 * n for n, d in argmax.items())
    ok = inside and elapsed < 600
    record("AC1", ok, f"argmax D per n {argmax}, bracket [0.8n, 1.25n]; {elapsed:.0f}s (< 600s)")
    assert ok


def test_ac2_peak_severity():
    spec = SweepSpec(model_dims=(200, 2000), sample_sizes=(200,), noise_levels=(0.1,), replicates=REPS)
    res = run_model_wise(spec)
    at_n, at_10n = res.cell(n_features=200).mean("test_mse"), res.cell(n_features=2000).mean("test_mse")
    ok = at_n >= 1.5 * at_10n
    record("AC2", ok, f"test mse D=n {at_n:.4g} vs D=10n {at_10n:.4g}; ratio {at_n / at_10n:.3g} (>= 1.5)")
    assert ok


def test_ac3_sample_wise_non_monotone():
    spec = SweepSpec(model_dims=(1000,), sample_sizes=geom_ints(100, 4000, 16), noise_levels=(0.1,),
                     replicates=REPS)
    res = run_sample_wise(spec)
    verdicts = {}
    for metric in ("test_err", "test_mse"):
        curve = res.curve("n_samples", metric)
        best = None
        for i, (n1, m1, s1) in enumerate(curve):
            for n2, m2, s2 in curve[i + 1:]:
                margin = (m2 - m1) - pooled_std(s1, s2)
                if best is None or margin > best[0]:
                    best = (margin, n1, n2)
        peak = locate_peak(curve)
        verdicts[metric] = (best[0] > 0, peak, best)
    rise, peak, best = verdicts["test_err"]
    ok = rise and peak is not None and 800 <= peak.x <= 1250
    mse_peak = verdicts["test_mse"][1]
    record("AC3", ok,
           f"test error rises n={best[1]}->{best[2]} by {best[0]:.3g} beyond 1 pooled std; "
           f"locate_peak at n={peak.x if peak else None} (in [800, 1250]); "
           f"test mse peak at n={mse_peak.x if mse_peak else None}")
    assert ok


def test_ac4_emc_exactness():
    source = SyntheticSource()
    t0 = time.perf_counter()
    found = {}
    for d in (10, 50, 200):
        proc = TrainingProcedure(d, metric="mse-threshold")
        found[d] = estimate_emc(proc, source, epsilon=0.0, n_max=4 * d, trials=5).n_star
    elapsed = time.perf_counter() - t0
    ok = all(found[d] == d for d in found) and elapsed < 60
    record("AC4", ok, f"n_star {found} (expect exactly D, mse-threshold metric); {elapsed:.1f}s (< 60s)")
    assert ok


def test_ac5_epoch_wise_emc_growth():
    solver = SolverSpec(method="gd-iterative", step_size=1.0, relative_step=True)
    spec = SweepSpec(model_dims=(200,), sample_sizes=(200,), noise_levels=(0.1,),
                     step_counts=(0, 10, 100, 1000, 10000), solver=solver, replicates=REPS,
                     record_emc=True)
    res = run_epoch_wise(spec)
    emc = {c.coords["steps"]: c.extras["emc"] for c in res.cells}
    checked = [emc[t] for t in (100, 1000, 10000)]
    emc_ok = checked == sorted(checked)
    mse_ok = True
    for r in range(REPS):
        mses = [c.replicates[r]["train_mse"] for c in res.cells]
        mse_ok &= all(b <= a for a, b in zip(mses, mses[1:]))
    ok = emc_ok and mse_ok
    record("AC5", ok, f"EMC by steps {emc}; train mse non-increasing on every replicate: {mse_ok}")
    assert ok


def test_ac6_ridge_suppresses_peak():
    spec = SweepSpec(model_dims=(200,), sample_sizes=(200,), noise_levels=(0.1,),
                     ridge_lambdas=tuple(np.geomspace(1e-4, 10, 11)), replicates=REPS)
    res = run_ridge_sweep(spec)
    zero = res.cell(ridge_lambda=0.0)
    best = min((c for c in res.cells if c.coords["ridge_lambda"] > 0), key=lambda c: c.mean("test_mse"))
    gap = zero.mean("test_mse") - best.mean("test_mse")
    pooled = pooled_std(zero.std("test_mse"), best.std("test_mse"))
    ok = gap >= pooled
    record("AC6", ok,
           f"lambda=0 mean {zero.mean('test_mse'):.4g} (std {zero.std('test_mse'):.4g}, replicates "
           f"{[round(float(v), 3) for v in zero.values('test_mse')]}); best lambda={best.coords['ridge_lambda']:.3g} "
           f"mean {best.mean('test_mse'):.4g}; gap {gap:.4g} vs pooled std {pooled:.4g}")
    assert ok


def test_ac7_ensemble_helps_at_criticality():
    spec = SweepSpec(model_dims=(200, 2000), sample_sizes=(200,), noise_levels=(0.1,), ensemble_k=5,
                     replicates=REPS)
    res = ensemble_run(spec)
    summary = {}
    for metric in ("test_err", "test_mse"):
        ens = {d: res.cell(n_features=d).mean(metric) for d in (200, 2000)}
        single = {d: res.cell(n_features=d).mean(f"member_{metric}") for d in (200, 2000)}
        gap = {d: single[d] - ens[d] for d in (200, 2000)}
        summary[metric] = (ens[200] <= single[200] and gap[200] > gap[2000], ens, single, gap)
    ok, ens, single, gap = summary["test_err"]
    mse_ok, mse_ens, mse_single, _ = summary["test_mse"]
    record("AC7", ok,
           f"test error D=n ensemble {ens[200]:.4f} vs single {single[200]:.4f} (gap {gap[200]:+.4f}); "
           f"D=10n gap {gap[2000]:+.4f}; on test mse: D=n {mse_ens[200]:.4g} vs {mse_single[200]:.4g} "
           f"(criterion {'holds' if mse_ok else 'fails'} on mse)")
    assert ok


def test_ac8_oracle_equivalences():
    worst = {"dual": 0.0, "gd": 0.0, "naive": 0.0}
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n, d = rng.integers(2, 15), rng.integers(16, 40)
        phi, y = rng.standard_normal((n, d)), rng.standard_normal((n, 3))
        dual = phi.T @ np.linalg.solve(phi @ phi.T, y)
        worst["dual"] = max(worst["dual"], np.linalg.norm(min_norm_solve(phi, y) - dual) / np.linalg.norm(dual))

        eta = 0.5 / np.linalg.norm(phi, 2) ** 2
        spec = SolverSpec(method="gd-iterative", step_size=eta, num_steps=100)
        it = gd_iterative(phi, y, spec, [100])[-1].coef
        worst["gd"] = max(worst["gd"], float(np.max(np.abs(gd_closed_form(phi, y, eta, 100) - it))))

        coef = rng.standard_normal((d, 3))
        total = 0.0
        for i in range(n):
            for c in range(3):
                total += (sum(phi[i, j] * coef[j, c] for j in range(d)) - y[i, c]) ** 2
        worst["naive"] = max(worst["naive"], abs(evaluate(coef, phi, y).mse - total / (n * 3)))

    rng = np.random.default_rng(99)
    phi, y = rng.standard_normal((10, 25)), rng.standard_normal((10, 2))
    target = min_norm_solve(phi, y)
    gaps = [float(np.linalg.norm(ridge_solve(phi, y, lam) - target)) for lam in (1e-2, 1e-4, 1e-6)]
    ridge_ok = gaps[0] > gaps[1] > gaps[2]
    ok = worst["dual"] <= 1e-10 and worst["gd"] <= 1e-8 and worst["naive"] <= 1e-12 and ridge_ok
    record("AC8", ok,
           f"min-norm vs dual {worst['dual']:.2e} (<= 1e-10); closed form vs iteration {worst['gd']:.2e} "
           f"(<= 1e-8); evaluate vs loop {worst['naive']:.2e} (<= 1e-12); ridge gaps "
           f"{[f'{g:.1e}' for g in gaps]} decreasing")
    assert ok


def test_ac9_label_noise_statistics():
    p, classes, n, trials = 0.2, 10, 10_000, 10
    flipped_total, shifts, violations = 0, np.zeros(classes, int), 0
    for t in range(trials):
        clean = np.random.default_rng(1000 + t).integers(0, classes, n)
        ds = Dataset(np.zeros((n, 1)), clean, clean.copy(), classes)
        noisy = apply_label_noise(ds, LabelNoiseSpec(p, seed=t))
        flipped = noisy.labels != clean
        flipped_total += flipped.sum()
        violations += int(np.sum(noisy.labels[noisy.flipped] == clean[noisy.flipped]))
        shifts += np.bincount((noisy.labels[flipped] - clean[flipped]) % classes, minlength=classes)
    total = n * trials
    frac = flipped_total / total
    se = np.sqrt(p * (1 - p) / total)
    pvalue = stats.chisquare(shifts[1:]).pvalue
    ok = abs(frac - p) <= 3 * se and violations == 0 and pvalue > 0.01 and shifts[0] == 0
    record("AC9", ok, f"flipped fraction {frac:.4f} (0.2 +/- {3 * se:.4f}); flipped==clean {violations}; "
                      f"chi-square p={pvalue:.3f} (> 0.01) over {total} labels")
    assert ok


def test_ac10_determinism():
    spec = SweepSpec(model_dims=(20, 60, 120), sample_sizes=(60, 120), noise_levels=(0.1,), replicates=3)
    a, b = run_grid(spec), run_grid(spec)
    same_csv = to_csv(a).encode() == to_csv(b).encode()
    parallel = run_grid(spec, workers=2)
    same_parallel = to_document(parallel) == to_document(a) and to_csv(parallel) == to_csv(a)
    ok = same_csv and same_parallel
    record("AC10", ok, f"rerun CSV byte-identical: {same_csv}; 2 workers identical to serial: {same_parallel}")
    assert ok


def _corruption_cases():
    good = bytes([0, 0, 0x08, 3]) + struct.pack(">3I", 2, 28, 28) + bytes(2 * 28 * 28)
    yield "truncated payload", good[:-1], len(good) - 1
    yield "trailing byte", good + b"\x00", len(good)
    yield "bad magic", b"\x01" + good[1:], 0
    yield "bad type", good[:2] + b"\x0e" + good[3:], 2
    yield "truncated header", good[:10], 10


def test_ac11_idx_ingestion():
    fixture_notes = []
    fixtures_ok = True
    for name, buf, offset in _corruption_cases():
        try:
            parse_idx(buf)
            fixtures_ok = False
            fixture_notes.append(f"{name}: accepted")
        except FormatError as exc:
            fixtures_ok &= exc.offset == offset and f"offset {offset}" in str(exc)
            fixture_notes.append(f"{name}@{exc.offset}")

    data_dir = data_dir_from_env()
    try:
        paths = fashion_mnist_paths(data_dir)
        images, labels = load_idx(paths["train-images"]), load_idx(paths["train-labels"])
        real_ok = images.shape == (60000, 28, 28) and labels.shape == (60000,) \
            and labels.min() >= 0 and labels.max() <= 9
        real_note = f"train images {images.shape}, labels {labels.shape} in [{labels.min()}, {labels.max()}]"
    except FileNotFoundError as exc:
        real_ok = False
        real_note = f"real files unavailable ({exc}); run `ddlab fetch-data` with network access"
    ok = fixtures_ok and real_ok
    record("AC11", ok, f"corrupted fixtures -> FormatError with offsets: {fixtures_ok} "
                       f"[{', '.join(fixture_notes)}]; {real_note}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
