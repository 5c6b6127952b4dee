"""Per-iteration execution-time vectors.

Four generators cover the experimental space: constant times, uniform
low-variability times (a stand-in for image-processing style loops with
CV around 0.1), gaussian times truncated to stay positive, and mandelbrot
escape counts, which give the strongly irregular profile that makes
self-scheduling interesting in the first place.

Vectors can be written to and read back from plain text files, one time per
line, so externally measured iteration timings can be replayed through the
simulator (run_simulation accepts a raw vector in place of a spec).

Generation is deterministic per seed. Mandelbrot needs no randomness at all:
escape counts are integers, immune to float formatting quirks, and are scaled
to seconds by a configurable cost per inner iteration. The default cost
(4e-5 s) is a desk-scale constant chosen so that a 100x100 grid yields a
makespan near a simulated minute on 16 PEs, comfortably above the default
10 s latency perturbation; it models no particular hardware.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

KINDS = ("constant", "uniform", "gaussian", "mandelbrot")

_DEFAULTS = {
    "constant": {"t": 1.0},
    "uniform": {"lo": 0.9, "hi": 1.1},
    "gaussian": {"mu": 1.0, "sigma": 0.1},
    "mandelbrot": {"width": 512, "height": 512, "max_iter": 10000, "cost": 4e-5,
                   "xmin": -2.0, "xmax": 0.5, "ymin": -1.25, "ymax": 1.25},
}


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str
    n_iterations: int
    params: tuple  # sorted (name, value) pairs, fully resolved
    seed: int = 0

    def param(self, name):
        return dict(self.params)[name]


def make_spec(kind: str, n_iterations: int, seed: int = 0, **params) -> WorkloadSpec:
    if kind not in KINDS:
        raise ValueError("unknown workload kind %r (choose from %s)" % (kind, ", ".join(KINDS)))
    if n_iterations < 1:
        raise ValueError("workload needs at least one iteration")
    merged = dict(_DEFAULTS[kind])
    for name, value in params.items():
        if name not in merged:
            raise ValueError("workload %s has no parameter %r" % (kind, name))
        merged[name] = value
    return WorkloadSpec(kind, n_iterations, tuple(sorted(merged.items())), seed)


def generate(spec: WorkloadSpec) -> np.ndarray:
    """Vector of N iteration times in seconds; strictly positive."""
    p = dict(spec.params)
    n = spec.n_iterations
    if spec.kind == "constant":
        if p["t"] <= 0:
            raise ValueError("constant time must be positive")
        return np.full(n, float(p["t"]))
    if spec.kind == "uniform":
        if not 0 < p["lo"] <= p["hi"]:
            raise ValueError("uniform bounds must satisfy 0 < lo <= hi")
        rng = np.random.default_rng([spec.seed, 2])
        return rng.uniform(p["lo"], p["hi"], n)
    if spec.kind == "gaussian":
        rng = np.random.default_rng([spec.seed, 2])
        v = rng.normal(p["mu"], p["sigma"], n)
        bad = v <= 0.0
        while bad.any():  # truncate by redrawing, keeps the shape above zero
            v[bad] = rng.normal(p["mu"], p["sigma"], int(bad.sum()))
            bad = v <= 0.0
        return v
    # mandelbrot
    w, h = int(p["width"]), int(p["height"])
    if n != w * h:
        raise ValueError("mandelbrot grid is %dx%d = %d pixels but N = %d"
                         % (w, h, w * h, n))
    counts = _escape_counts(w, h, int(p["max_iter"]),
                            p["xmin"], p["xmax"], p["ymin"], p["ymax"])
    return counts.astype(np.float64) * float(p["cost"])


@lru_cache(maxsize=8)
def _escape_counts(width, height, max_iter, xmin, xmax, ymin, ymax):
    # iteration i maps to pixel (i // width, i % width), sampled at the center
    idx = np.arange(width * height)
    x = xmin + ((idx % width) + 0.5) * (xmax - xmin) / width
    y = ymin + ((idx // width) + 0.5) * (ymax - ymin) / height
    c = x + 1j * y
    counts = np.full(c.size, max_iter, dtype=np.int64)
    alive = np.arange(c.size)
    z = np.zeros_like(c)
    for k in range(1, max_iter + 1):
        z = z * z + c
        escaped = (z.real * z.real + z.imag * z.imag) > 4.0
        if escaped.any():
            counts[alive[escaped]] = k
            keep = ~escaped
            alive, z, c = alive[keep], z[keep], c[keep]
            if alive.size == 0:
                break
    counts.setflags(write=False)
    return counts


def save_times(path, times) -> None:
    """One iteration time per line; repr keeps the roundtrip exact."""
    with open(path, "w") as fh:
        for t in times:
            fh.write(repr(float(t)))
            fh.write("\n")


def load_times(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()], dtype=np.float64)
