"""Workload generator behavior: determinism, positivity, variability ordering."""

import numpy as np
import pytest

from rdlb import workloads as wl


def test_constant_all_ones():
    spec = wl.make_spec("constant", 50, t=1.0)
    v = wl.generate(spec)
    assert v.shape == (50,)
    assert np.all(v == 1.0)


def test_uniform_bounds_and_determinism():
    spec = wl.make_spec("uniform", 4000, seed=3, lo=0.9, hi=1.1)
    a = wl.generate(spec)
    b = wl.generate(spec)
    assert np.array_equal(a, b)
    assert a.min() >= 0.9 and a.max() <= 1.1
    c = wl.generate(wl.make_spec("uniform", 4000, seed=4, lo=0.9, hi=1.1))
    assert not np.array_equal(a, c)


def test_gaussian_truncated_positive():
    # parameters chosen to force many redraws
    spec = wl.make_spec("gaussian", 5000, seed=0, mu=0.1, sigma=1.0)
    v = wl.generate(spec)
    assert np.all(v > 0.0)
    assert wl.generate(spec)[0] == v[0]


def test_gaussian_moments():
    spec = wl.make_spec("gaussian", 20000, seed=1, mu=1.0, sigma=0.1)
    v = wl.generate(spec)
    assert v.mean() == pytest.approx(1.0, abs=0.01)
    assert v.std() == pytest.approx(0.1, abs=0.01)


def test_mandelbrot_grid_must_match_n():
    # the full-size default grid is 512 x 512
    spec = wl.make_spec("mandelbrot", 512 * 512)
    assert spec.n_iterations == 262144
    with pytest.raises(ValueError):
        wl.generate(wl.make_spec("mandelbrot", 1000))  # not a 512x512 grid


def test_mandelbrot_counts_scaled():
    spec = wl.make_spec("mandelbrot", 32 * 32, width=32, height=32,
                        max_iter=600, cost=1e-5)
    v = wl.generate(spec)
    assert v.shape == (1024,)
    assert np.all(v > 0.0)
    counts = v / 1e-5
    assert np.allclose(counts, np.round(counts))
    assert counts.max() == 600.0  # interior pixels saturate
    assert np.array_equal(v, wl.generate(spec))


def test_variability_ordering():
    def cv(v):
        return v.std() / v.mean()

    const = wl.generate(wl.make_spec("constant", 4096, t=1.0))
    uni = wl.generate(wl.make_spec("uniform", 4096, seed=0, lo=0.9, hi=1.1))
    mandel = wl.generate(wl.make_spec("mandelbrot", 4096, width=64, height=64,
                                      max_iter=2000, cost=1e-5))
    assert cv(const) == 0.0
    assert cv(mandel) > cv(uni) > cv(const)


def test_export_import_roundtrip(tmp_path):
    spec = wl.make_spec("gaussian", 300, seed=9, mu=2.0, sigma=0.3)
    v = wl.generate(spec)
    path = tmp_path / "times.txt"
    wl.save_times(path, v)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 300
    w = wl.load_times(path)
    assert np.array_equal(v, w)  # exact roundtrip, not approximate


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        wl.make_spec("weibull", 10)
