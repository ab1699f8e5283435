"""Checkpointed occupation series along orbits and normalized-ratio statistics.

A series records the one-sided and symmetric counts of base visits at a
grid of window radii.  Time 0 is always a visit for the orbits produced
here (names start on the base, walks start on the fiber origin), and the
center is counted once, shared by both one-sided counts; the convention is
recorded on every series so the exact identity sigma = s_plus + s_minus - 1
is checkable downstream.

Normalized statistics divide by a scaling sequence and keep running
extrema past a burn-in.  The extrema are finite-horizon bounds for
limit-superior/inferior quantities and are labeled as such; nothing here
extrapolates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .errors import InvariantViolationError
from .lattice import WalkSample, walk_visits
from .rankone import NameSampler, window_counts
from .regvar import ScalingSequence

CENTER_CONVENTION = "center counted once, shared by s_plus and s_minus"


@dataclass(frozen=True)
class BirkhoffSeries:
    """Occupation counts at increasing checkpoint radii.

    s_plus[i] counts visits at times 0..n_i, s_minus[i] at times -n_i..0,
    sigma[i] at |t| <= n_i; with the recorded center convention
    sigma = s_plus + s_minus - 1 exactly.
    """

    checkpoints: tuple[int, ...]
    s_plus: tuple[int, ...]
    s_minus: tuple[int, ...]
    sigma: tuple[int, ...]
    source: str
    convention: str = CENTER_CONVENTION

    def __post_init__(self):
        cps = self.checkpoints
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        for seq, name in ((self.s_plus, "s_plus"), (self.s_minus, "s_minus"),
                          (self.sigma, "sigma")):
            if len(seq) != len(cps):
                raise ValueError(f"{name} length does not match checkpoints")
            if any(b < a for a, b in zip(seq, seq[1:])):
                raise InvariantViolationError(f"{name} is not nondecreasing")
        for n, sp, sm, sg in zip(cps, self.s_plus, self.s_minus, self.sigma):
            if sg != sp + sm - 1:
                raise InvariantViolationError(
                    f"sigma != s_plus + s_minus - 1 at checkpoint {n}")
            if sg > 2 * n + 1:
                raise InvariantViolationError(
                    f"sigma = {sg} exceeds window size {2 * n + 1} at {n}")


def series_from_name(sampler: NameSampler, checkpoints: Sequence[int],
                     depth_cap: int | None = None) -> BirkhoffSeries:
    """Counts from a symbolic name at each checkpoint radius."""
    cps = tuple(int(n) for n in checkpoints)
    kwargs = {} if depth_cap is None else {"depth_cap": depth_cap}
    s_plus, s_minus, sigma = [], [], []
    for n in cps:
        w = window_counts(sampler, n, **kwargs)
        s_plus.append(w.s_plus)
        s_minus.append(w.s_minus)
        sigma.append(w.sigma)
    label = sampler.data.name or "custom"
    return BirkhoffSeries(cps, tuple(s_plus), tuple(s_minus), tuple(sigma),
                          source=f"rankone[{label}]")


def series_from_walk(walk: WalkSample, checkpoints: Sequence[int]) -> BirkhoffSeries:
    """Counts #{k : |s_k| <= n} from a sampled walk, split by sign of k.

    The walk must cover the largest checkpoint on both sides; steps are
    >= 1, so |s_k| <= n bounds |k| <= n and the interarrival count equals
    the direct box count.
    """
    cps = tuple(int(n) for n in checkpoints)
    s_plus, s_minus, sigma = [], [], []
    for n in cps:
        bwd, center, fwd = walk_visits(walk, n)
        s_plus.append(center + fwd)
        s_minus.append(center + bwd)
        sigma.append(bwd + center + fwd)
    return BirkhoffSeries(cps, tuple(s_plus), tuple(s_minus), tuple(sigma),
                          source=f"walk[{walk.f.label}]")


@dataclass(frozen=True)
class SeriesStats:
    """Per-orbit ratios and running extrema past the burn-in."""

    label: str
    checkpoints: tuple[int, ...]
    ratio_sym: tuple[float, ...]
    ratio_plus: tuple[float, ...]
    tail_checkpoints: tuple[int, ...]
    running_sup: tuple[float, ...]
    running_inf: tuple[float, ...]
    sup_plus: float
    oscillation: float

    @property
    def sup_sym(self) -> float:
        return self.running_sup[-1]

    @property
    def inf_sym(self) -> float:
        return self.running_inf[-1]


@dataclass(frozen=True)
class NormalizedStats:
    """Ensemble-normalized ratio statistics.

    alpha_hat / beta_hat are maxima of one-sided and symmetric ratio
    suprema over the ensemble; beta_lower_hat is the minimum of the
    symmetric ratio infima.  All three are finite-horizon bounds for the
    corresponding limit quantities (lower bounds for the suprema, an upper
    bound for the infimum); enlarging the ensemble or the horizon moves
    them only toward the limits.
    """

    series: tuple[SeriesStats, ...]
    scaling_name: str
    burn_in: int
    alpha_hat: float
    beta_hat: float
    beta_lower_hat: float
    flags: tuple[str, ...]

    @property
    def oscillations(self) -> tuple[float, ...]:
        return tuple(s.oscillation for s in self.series)


def _series_stats(series: BirkhoffSeries, scaling: ScalingSequence,
                  burn_in: int, label: str) -> SeriesStats:
    ratio_sym, ratio_plus = [], []
    for n, sp, sg in zip(series.checkpoints, series.s_plus, series.sigma):
        if n < max(1, scaling.domain_min):
            ratio_sym.append(math.nan)
            ratio_plus.append(math.nan)
            continue
        a_n = scaling(n)
        if a_n <= 0:
            raise InvariantViolationError(f"{scaling.name}: a({n}) <= 0")
        ratio_sym.append(sg / (2 * a_n))
        ratio_plus.append(sp / a_n)
    tail = [(n, rs, rp) for n, rs, rp in
            zip(series.checkpoints, ratio_sym, ratio_plus) if n >= burn_in]
    if not tail:
        raise ValueError(f"no checkpoints at or past burn-in {burn_in}")
    sup, inf = -math.inf, math.inf
    running_sup, running_inf = [], []
    for _, rs, _ in tail:
        sup = max(sup, rs)
        inf = min(inf, rs)
        running_sup.append(sup)
        running_inf.append(inf)
    return SeriesStats(
        label=label,
        checkpoints=series.checkpoints,
        ratio_sym=tuple(ratio_sym),
        ratio_plus=tuple(ratio_plus),
        tail_checkpoints=tuple(n for n, _, _ in tail),
        running_sup=tuple(running_sup),
        running_inf=tuple(running_inf),
        sup_plus=max(rp for _, _, rp in tail),
        oscillation=sup - inf,
    )


def normalized_stats(ensemble: Sequence[BirkhoffSeries], scaling: ScalingSequence,
                     burn_in: int, labels: Sequence[str] | None = None) -> NormalizedStats:
    """Ratios, running extrema, and ensemble estimators for a series ensemble.

    The sanity bound beta_lower_hat <= alpha_hat/2 + 0.1 is checked and a
    violation is flagged (and warned about), never silently accepted:
    finite-horizon estimators only approximate the limit quantities, so a
    breach means the run deserves review, not an exception.
    """
    if not ensemble:
        raise ValueError("ensemble must be nonempty")
    if burn_in < 1:
        raise ValueError("burn_in must be >= 1")
    if labels is None:
        labels = [str(i) for i in range(len(ensemble))]
    stats = tuple(_series_stats(s, scaling, burn_in, lbl)
                  for s, lbl in zip(ensemble, labels))
    alpha_hat = max(s.sup_plus for s in stats)
    beta_hat = max(s.sup_sym for s in stats)
    beta_lower_hat = min(s.inf_sym for s in stats)
    flags = []
    if beta_lower_hat > alpha_hat / 2 + 0.1:
        flags.append(
            f"beta_lower_hat = {beta_lower_hat:.4f} exceeds alpha_hat/2 + 0.1 "
            f"= {alpha_hat / 2 + 0.1:.4f}; review the horizon and burn-in")
        warnings.warn(flags[-1], stacklevel=2)
    return NormalizedStats(stats, scaling.name, burn_in, alpha_hat, beta_hat,
                           beta_lower_hat, tuple(flags))


def series_rows(series: BirkhoffSeries, scaling: ScalingSequence) -> list[tuple]:
    """Rows (n, s_plus, s_minus, sigma, a_n, ratio_sym, ratio_plus) for CSV."""
    rows = []
    for n, sp, sm, sg in zip(series.checkpoints, series.s_plus,
                             series.s_minus, series.sigma):
        if n >= max(1, scaling.domain_min):
            a_n = scaling(n)
            rows.append((n, sp, sm, sg, a_n, sg / (2 * a_n), sp / a_n))
        else:
            rows.append((n, sp, sm, sg, "", "", ""))
    return rows
