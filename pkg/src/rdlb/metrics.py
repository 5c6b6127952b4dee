"""Closed-form cost model for a single fail-stop failure, plus robustness.

The model assumes n equal tasks per PE of t seconds each on q PEs.  If one PE
fails while executing task i (uniform over tasks), the q-1 survivors share
the n-i unfinished tasks.  Checkpoint/restart is the comparison point, with
the usual sqrt(2*lambda*C) first-order overhead.

Robustness follows the radius-and-ratio construction: the radius is how much
a perturbation stretches a technique's makespan, and rho normalizes by the
smallest radius so the most robust technique scores exactly 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


@dataclass(frozen=True)
class TheoryParams:
    n: int            # tasks per PE
    q: int            # PE count
    t: float          # seconds per task
    lam: float        # failure rate, 1/seconds
    c: float = 0.0    # checkpoint cost, seconds

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.q < 2:
            raise ValueError("q must be at least 2 (survivors share the load)")
        if self.t <= 0.0:
            raise ValueError("t must be positive")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        if self.c < 0.0:
            raise ValueError("c must be nonnegative")

    @property
    def t_free(self) -> float:
        """Failure-free makespan n*t."""
        return self.n * self.t

    @property
    def p_failure(self) -> float:
        """Probability of at least one failure within t_free."""
        return 1.0 - math.exp(-self.lam * self.t_free)


def expected_time_one_failure(p: TheoryParams) -> float:
    return p.t_free + p.p_failure * (p.t / 2.0) * (p.n + 1) / (p.q - 1)


def expected_time_first_order(p: TheoryParams) -> float:
    """Same with p_failure linearized to lam*T; valid while lam*T << 1."""
    return p.t_free + p.lam * p.t_free * (p.t / 2.0) * (p.n + 1) / (p.q - 1)


def overhead_rdlb(p: TheoryParams) -> float:
    """First-order relative makespan overhead of re-executing lost tasks."""
    return (p.lam * p.t / 2.0) * (p.n + 1) / (p.q - 1)


def overhead_checkpoint(p: TheoryParams) -> float:
    return math.sqrt(2.0 * p.lam * p.c)


def checkpoint_crossover(p: TheoryParams) -> tuple[float, bool]:
    """Checkpoint cost above which rescheduling is no worse than checkpointing.

    Returns (threshold on C, flag for the given p.c).  Only meaningful in the
    first-order regime C << 1/lam.
    """
    threshold = (p.lam * p.t ** 2 / 8.0) * (p.n + 1) ** 2 / (p.q - 1) ** 2
    return threshold, overhead_rdlb(p) <= overhead_checkpoint(p)


def makespan(per_pe_times) -> float:
    """Makespan of a run given total busy time per PE (no-failure case)."""
    return max(per_pe_times)


@dataclass(frozen=True)
class RobustnessReport:
    scenario: str
    techniques: tuple
    baselines: tuple
    perturbed: tuple
    radii: tuple
    rho: tuple
    degenerate: bool

    def rows(self):
        """(technique, scenario, t_baseline, t_perturbed, radius, rho) rows."""
        for i, tech in enumerate(self.techniques):
            yield (tech, self.scenario, self.baselines[i], self.perturbed[i],
                   self.radii[i], self.rho[i])


def robustness(baselines: dict, perturbed: dict, scenario: str = "") -> RobustnessReport:
    """Radii and rho per technique for one perturbation scenario.

    Negative radii (perturbed run faster than baseline, possible with noisy
    techniques) are clamped to 0 with a warning.  When the smallest radius is
    0 the ratio is ill-defined: zero-radius techniques get rho 1, the rest
    inf, and the report is flagged degenerate.
    """
    if set(baselines) != set(perturbed):
        raise ValueError("baseline and perturbed technique sets differ")
    techniques = tuple(baselines)
    radii = []
    for tech in techniques:
        r = perturbed[tech] - baselines[tech]
        if r < 0.0:
            warnings.warn(f"{tech}: perturbed run faster than baseline; "
                          "radius clamped to 0")
            r = 0.0
        radii.append(r)
    r_min = min(radii)
    if r_min == 0.0:
        rho = tuple(1.0 if r == 0.0 else math.inf for r in radii)
        degenerate = True
    elif math.isinf(r_min):
        # every technique diverged; no finite anchor to normalize against
        rho = tuple(1.0 for _ in radii)
        degenerate = True
    else:
        rho = tuple(r / r_min for r in radii)
        degenerate = False
    return RobustnessReport(
        scenario=scenario, techniques=techniques,
        baselines=tuple(baselines[t] for t in techniques),
        perturbed=tuple(perturbed[t] for t in techniques),
        radii=tuple(radii), rho=rho, degenerate=degenerate)
