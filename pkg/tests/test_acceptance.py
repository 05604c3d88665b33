"""Exit criteria for the package, one test per criterion.

Each test prints a PASS/FAIL line (also collected in the terminal summary)
before asserting, so a red criterion still reports its measured value.
"""

import json
import time

import numpy as np
import pytest

from oracles import direct_correlation_1d, direct_correlation_2d
from xcorr_rom.cli import main
from xcorr_rom.pipeline import default_reference_index, evaluate, offline, rank_sweep
from xcorr_rom.reduction import compute_pod, energy_curve, project, reconstruct
from xcorr_rom.regression import eval_rbf, eval_shift, linear_trend
from xcorr_rom.registration import (circular_shift, cross_correlate, optimal_shift, register_set,
                                    unregister)
from xcorr_rom.snapshots import VortexParams, generate_vortex, generate_wave, split

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def wave_case():
    t0 = time.perf_counter()
    train, test = split(generate_wave(), 0.5)
    ref = default_reference_index(train.times, 3.03)
    return train, test, ref, time.perf_counter() - t0


@pytest.fixture(scope="module")
def vortex_desk_case():
    t0 = time.perf_counter()
    train, test = split(generate_vortex(VortexParams(sizes=(120, 60))), 0.3)
    return train, test, default_reference_index(train.times), time.perf_counter() - t0


@pytest.fixture(scope="module")
def vortex_full_case():
    train, test = split(generate_vortex(VortexParams(sizes=(240, 120))), 0.3)
    return train, test, default_reference_index(train.times)


def test_c01_registered_wave_rank_collapse(wave_case, criterion):
    train, _, ref, t_gen = wave_case
    t0 = time.perf_counter()
    reg = register_set(train, ref)
    e1 = energy_curve(compute_pod(reg.snapshots.data))[0]
    elapsed = t_gen + time.perf_counter() - t0
    ok = e1 >= 0.999 and elapsed < 5
    criterion(1, "registered wave E(1) >= 0.999", ok, f"E(1)={e1:.6f}, {elapsed:.2f}s")
    assert e1 >= 0.999
    assert elapsed < 5


def test_c02_unregistered_wave_slow_decay(wave_case, criterion):
    train, _, _, t_gen = wave_case
    t0 = time.perf_counter()
    m = compute_pod(train.data, energy_threshold=0.9999).rank_selected
    elapsed = t_gen + time.perf_counter() - t0
    ok = m >= 10 and elapsed < 5
    criterion(2, "unregistered wave modes for 0.9999 >= 10", ok, f"m={m}, {elapsed:.2f}s")
    assert ok


def test_c03_error_separation_1d(wave_case, criterion):
    train, test, ref, t_gen = wave_case
    t0 = time.perf_counter()
    reg1 = rank_sweep(train, test, (1,), True, reference_index=ref)[0][1]
    raw25 = rank_sweep(train, test, (25,), False)[0][1]
    elapsed = t_gen + time.perf_counter() - t0
    ok = reg1 <= raw25 / 10 and elapsed < 30
    criterion(3, "wave registered r=1 <= unregistered r=25 / 10", ok,
              f"{reg1:.4e} vs {raw25:.4e}/10, {elapsed:.2f}s")
    assert ok


def test_c04_error_separation_vortex_desk(vortex_desk_case, criterion):
    train, test, ref, t_gen = vortex_desk_case
    t0 = time.perf_counter()
    reg = register_set(train, ref, background=1.0)
    e1 = energy_curve(compute_pod(reg.snapshots.data))[0]
    reg1 = rank_sweep(train, test, (1,), True, reference_index=ref, background=1.0)[0][1]
    raw25 = rank_sweep(train, test, (25,), False)[0][1]
    elapsed = t_gen + time.perf_counter() - t0
    ok = e1 >= 0.999 and reg1 <= raw25 / 10 and elapsed < 300
    criterion(4, "vortex 120x60 E(1) >= 0.999 and r=1 <= unregistered r=25 / 10", ok,
              f"E(1)={e1:.10f}, {reg1:.4e} vs {raw25:.4e}/10, {elapsed:.2f}s")
    assert ok


def test_c05_correlation_oracle(criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for i in range(100):
        n = (7, 64, 255)[i % 3]
        f, g = rng.standard_normal((2, n))
        worst = max(worst, np.abs(cross_correlate(f, g) - direct_correlation_1d(f, g)).max())
    for _ in range(20):
        shape = (int(rng.integers(1, 18)), int(rng.integers(1, 32)))
        f, g = rng.standard_normal((2, *shape))
        worst = max(worst, np.abs(cross_correlate(f, g) - direct_correlation_2d(f, g)).max())
    criterion(5, "FFT correlation vs direct sum <= 1e-9", worst <= 1e-9, f"max dev {worst:.2e}")
    assert worst <= 1e-9


def test_c06_shift_round_trip(criterion):
    rng = np.random.default_rng(6)
    failures = 0
    for i in range(1000):
        if i % 2:
            x = rng.standard_normal(int(rng.integers(1, 200)))
        else:
            x = rng.standard_normal((int(rng.integers(1, 40)), int(rng.integers(1, 40))))
        d = rng.integers(-3 * max(x.shape), 3 * max(x.shape) + 1, size=x.ndim)
        failures += not np.array_equal(unregister(circular_shift(x, d), d), x)
    criterion(6, "unregister(shift(x, d), d) == x bit-exactly", failures == 0,
              f"{failures}/1000 mismatches")
    assert failures == 0


def test_c07_eckart_young(criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        S = rng.standard_normal((20, 10))
        s = np.linalg.svd(S, compute_uv=False)
        for r in range(1, 11):
            b = compute_pod(S, rank=r)
            err = np.linalg.norm(S - reconstruct(b, project(b, S)))
            tail = np.sqrt(np.sum(s[r:] ** 2))
            worst = max(worst, abs(err - tail) / max(tail, np.linalg.norm(S)))
    criterion(7, "rank-r error = tail singular norm, rel 1e-10", worst <= 1e-10,
              f"max rel dev {worst:.2e}")
    assert worst <= 1e-10


def test_c08_shift_map_fidelity(wave_case, criterion):
    train, test, ref, _ = wave_case
    model = offline(train, ref)
    _, _, r2 = linear_trend(train.times, model.shifts[:, 0])
    oracle = np.array([optimal_shift(train.field(ref), test.field(j))[0]
                       for j in range(test.n_snapshots)])
    predicted = eval_shift(model.shift_map, test.times)[:, 0]
    dev = int(np.abs(predicted - oracle).max())
    ok = r2[0] >= 0.999 and dev <= 1
    criterion(8, "shift line R^2 >= 0.999, test shifts within 1 cell", ok,
              f"R^2={r2[0]:.6f}, max dev {dev} cells")
    assert ok


def test_c09_rbf_node_exactness(wave_case, vortex_desk_case, criterion):
    worst = 0.0
    for train, _, ref, _ in (wave_case, vortex_desk_case[:3] + (0,)):
        bg = 1.0 if train.grid.n_dims == 2 else None
        for register in (True, False):
            m = offline(train, ref, register=register, background=bg)
            c = m.coefficients.coeffs
            dev = np.abs(eval_rbf(m.coeff_model, m.train_times) - c).max()
            worst = max(worst, dev / (1 + np.abs(c).max()))
    criterion(9, "RBF reproduces training coefficients within 1e-8 (1 + |c|max)",
              worst <= 1e-8, f"max scaled dev {worst:.2e}")
    assert worst <= 1e-8


def _train_test_means(train, test, ref, **options):
    m = offline(train, ref, **options)
    return evaluate(m, train).mean_relative_l2, evaluate(m, test).mean_relative_l2


def test_c10_train_test_ordering(wave_case, vortex_full_case, criterion):
    w_train, w_test = _train_test_means(*wave_case[:3])
    v_train, v_test = _train_test_means(*vortex_full_case, background=1.0)
    ok = w_test >= w_train and v_test >= v_train
    criterion(10, "test error >= train error (wave, vortex 240x120)", ok,
              f"wave {w_train:.3e} <= {w_test:.3e}; vortex {v_train:.3e} <= {v_test:.3e}")
    assert ok


@pytest.mark.xfail(reason="at 120x60 the vortex test error falls just below the train error; "
                          "the criterion is asserted on the 240x120 grid", strict=False)
def test_c10_desk_scale_vortex(vortex_desk_case):
    v_train, v_test = _train_test_means(*vortex_desk_case[:3], background=1.0)
    print(f"vortex 120x60 train {v_train:.4e}, test {v_test:.4e}")
    assert v_test >= v_train


def test_c11_sweep_determinism(tmp_path, criterion):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"case": "gaussian-wave", "ranks": [1, 2, 5]}))
    for name in ("a", "b"):
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in ("sweep.csv", "singular_values.csv"))
    criterion(11, "repeated sweep gives byte-identical CSVs", same,
              "identical" if same else "differs")
    assert same
