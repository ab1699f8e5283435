"""Two planar group actions: translations of the line and a random-walk
skew product over an integer fiber.

Translation orbits are counted exactly in O(N): for each first generator
power k, the admissible second powers form an integer interval, so no 2-D
scan happens.  Walk orbits are counted by binary search over the monotone
partial sums of the sampled steps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ConfigError, CoverageError, PrecisionWarning
from .renewal import LifetimeDistribution, RenewalSequence, renewal_sequence
from .streams import normalize

# beyond this magnitude the float64 grid spacing gets within ~2**-7 of the
# unit window resolution and counting switches to exact rationals
FLOAT_PRECISION_LIMIT = 2.0 ** 45

# a ratio within _RATIONAL_PRECISION of a rational with denominator at most
# _RATIONAL_MAX_DEN is treated as that rational; badly approximable
# constants (golden ratio, sqrt 2) sit ~1e-13 away from every such
# rational and pass
_RATIONAL_MAX_DEN = 10 ** 6
_RATIONAL_PRECISION = 1e-14


def _rational_ratio(value: float) -> Fraction | None:
    """Detect a ratio that encodes a small-denominator rational.

    Floats are always rational, so true irrationality is unverifiable;
    the continued-fraction convergent with denominator <= _RATIONAL_MAX_DEN
    (via Fraction.limit_denominator) is compared against the value at the
    configured precision.
    """
    frac = Fraction(value).limit_denominator(_RATIONAL_MAX_DEN)
    if abs(float(frac) - value) <= _RATIONAL_PRECISION * max(1.0, abs(value)):
        return frac
    return None


@dataclass(frozen=True)
class TranslationAction:
    """x -> x + k*alpha + l*beta acting on the line, observed on [0, 1).

    The ergodic-limit statements require alpha/beta irrational; floats
    cannot carry irrationality, so construction warns (or raises with
    strict=True) when the ratio is detectably an exact rational, and the
    documented limits refer to the idealized parameters.  Normalization
    divides both translations by |beta|; the asymmetry ratio R is
    invariant under it.
    """

    alpha: float
    beta: float = 1.0
    x: float = 0.0
    strict: bool = False

    def __post_init__(self):
        if self.beta == 0.0 or self.alpha == 0.0:
            raise ConfigError("alpha and beta must be nonzero")
        ratio = _rational_ratio(self.alpha / self.beta)
        if ratio is not None:
            msg = (f"alpha/beta = {self.alpha / self.beta!r} is exactly the "
                   f"rational {ratio}; orbit-density limits do not apply")
            if self.strict:
                raise ConfigError(msg)
            warnings.warn(msg, PrecisionWarning, stacklevel=2)

    @property
    def alpha_normalized(self) -> float:
        return self.alpha / abs(self.beta)

    @property
    def x_normalized(self) -> float:
        return self.x / abs(self.beta)

    @property
    def asymmetry_ratio(self) -> float:
        """R = min(|alpha|, |beta|) / max(|alpha|, |beta|), in (0, 1]."""
        lo, hi = sorted((abs(self.alpha), abs(self.beta)))
        return lo / hi


class TranslateCount(NamedTuple):
    count: int
    ratio: float


def _translate_count_exact(alpha, beta, x, n_box: int) -> int:
    a, b, x0 = Fraction(alpha), Fraction(beta), Fraction(x)
    count = 0
    for k in range(-n_box, n_box + 1):
        t = x0 + k * a
        if b > 0:
            lo = math.ceil(-t / b)
            hi = math.ceil((1 - t) / b) - 1
        else:
            lo = math.floor((1 - t) / b) + 1
            hi = math.floor(-t / b)
        lo = max(lo, -n_box)
        hi = min(hi, n_box)
        if hi >= lo:
            count += hi - lo + 1
    return count


def translate_counts(action: TranslationAction, n_box: int,
                     method: str = "auto") -> TranslateCount:
    """Orbit points of the (2N+1)^2 box landing in [0, 1), and count/(2N+1).

    method "float" uses the compiled/NumPy kernel; "exact" counts with
    rational arithmetic on the exact binary values of the inputs; "auto"
    picks float until N * max translation magnitude crosses
    FLOAT_PRECISION_LIMIT, then warns and goes exact.
    """
    if n_box < 0:
        raise ValueError("box radius must be >= 0")
    scale = max(abs(action.alpha), abs(action.beta), abs(action.x))
    if method == "auto":
        if n_box * scale >= FLOAT_PRECISION_LIMIT:
            warnings.warn(
                f"N*|alpha| = {n_box * scale:.3g} approaches float64 "
                "resolution of the unit window; switching to exact rational "
                "counting", PrecisionWarning, stacklevel=2)
            method = "exact"
        else:
            method = "float"
    if method == "float":
        count = kernels.translate_count(action.alpha, action.beta, action.x, n_box)
    elif method == "exact":
        count = _translate_count_exact(action.alpha, action.beta, action.x, n_box)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TranslateCount(int(count), count / (2 * n_box + 1))


@dataclass(frozen=True)
class WalkSample:
    """Two-sided i.i.d. steps omega_j, j in [-J, J-1], with partial sums.

    s_k follows the three-case definition: sum of omega_0..omega_{k-1} for
    k >= 1, zero at k = 0, and -(omega_{-1} + ... + omega_{-|k|}) for
    k <= -1.  Steps are >= 1, so s is strictly increasing in k.
    """

    f: LifetimeDistribution
    J: int
    omega_forward: np.ndarray   # omega_0 .. omega_{J-1}
    omega_backward: np.ndarray  # omega_{-1} .. omega_{-J}
    s_forward: np.ndarray = field(repr=False)       # s_1 .. s_J
    s_backward_mag: np.ndarray = field(repr=False)  # |s_{-1}| .. |s_{-J}|

    def omega(self, j: int) -> int:
        if 0 <= j < self.J:
            return int(self.omega_forward[j])
        if -self.J <= j < 0:
            return int(self.omega_backward[-j - 1])
        raise IndexError(f"step index {j} outside [-{self.J}, {self.J - 1}]")

    def s(self, k: int) -> int:
        if k == 0:
            return 0
        if k >= 1:
            if k > self.J:
                raise IndexError(f"partial sum index {k} beyond J={self.J}")
            return int(self.s_forward[k - 1])
        if -k > self.J:
            raise IndexError(f"partial sum index {k} beyond J={self.J}")
        return -int(self.s_backward_mag[-k - 1])

    @property
    def reach_forward(self) -> int:
        return int(self.s_forward[-1])

    @property
    def reach_backward(self) -> int:
        return int(self.s_backward_mag[-1])


def walk_sample(f: LifetimeDistribution, seed, J: int) -> WalkSample:
    """Draw the two-sided step sequence; forward block first, then backward."""
    if J < 1:
        raise ValueError("J must be >= 1")
    rng = normalize(seed)
    fwd = f.sample(rng, J)
    bwd = f.sample(rng, J)
    for block in (fwd, bwd):
        if float(block.astype(np.float64).sum()) >= 4.0e18:
            raise CoverageError("walk partial sums would overflow int64")
    return WalkSample(f, J, fwd, bwd, np.cumsum(fwd), np.cumsum(bwd))


class WalkCount(NamedTuple):
    count: int
    ratio_to_renewal: float
    a_u_value: float


def walk_visits(sample: WalkSample, horizon: int) -> tuple[int, int, int]:
    """(backward, center=1, forward) visit counts: #{k : |s_k| <= horizon} split by sign."""
    if sample.reach_forward < horizon or sample.reach_backward < horizon:
        raise CoverageError(
            f"walk reaches [{-sample.reach_backward}, {sample.reach_forward}] "
            f"but the horizon needs +-{horizon}; resample with J >= {horizon} "
            "(steps are >= 1, so J = horizon always covers)")
    fwd = int(np.searchsorted(sample.s_forward, horizon, side="right"))
    bwd = int(np.searchsorted(sample.s_backward_mag, horizon, side="right"))
    return bwd, 1, fwd


def walk_counts(sample: WalkSample, n_box: int,
                renewal: RenewalSequence | None = None) -> WalkCount:
    """Box count #{k in [-N, N] : |s_k| <= N} and its renewal normalization.

    Steps are >= 1, so |s_k| <= N already forces |k| <= N; the count comes
    from two binary searches.  ``renewal`` may carry a precomputed
    sequence (it must extend to N); otherwise one is computed here.
    """
    bwd, center, fwd = walk_visits(sample, n_box)
    count = bwd + center + fwd
    if renewal is None:
        renewal = renewal_sequence(sample.f, n_box)
    if renewal.n_max < n_box:
        raise ValueError(f"renewal sequence only reaches {renewal.n_max} < {n_box}")
    a_u_value = float(renewal.a_u[n_box])
    return WalkCount(count, count / a_u_value, a_u_value)
