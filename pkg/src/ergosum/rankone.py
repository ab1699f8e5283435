"""Cutting-and-stacking towers with exact symbolic names.

A construction is a sequence of stages ``(c_n; S_{n,1..c_n})``: cut the
current column into ``c_n`` slices, put ``S_{n,k}`` spacer levels above
slice k, and stack.  Level n of the tower induces a word ``B_n`` over
{base, spacer} of length ``q_n`` describing q_n consecutive orbit
positions of a base point; ``B_{n+1}`` is B_n, then S_{n,1} spacers, ...,
B_n, then S_{n,c_n} spacers.

Occupation counts over windows of astronomical radius never materialize a
word: they come from per-level prefix counts computed down the block
structure, O(levels * max c) per query with arbitrary-precision offsets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DepthCapError,
    ExpansionBudgetError,
    InvariantViolationError,
    StageDataExhaustedError,
)
from .regvar import ScalingSequence
from .streams import normalize

BASE = 1
SPACER = 0
SPACER_TOKEN = "2q"

DEFAULT_EXPANSION_BUDGET = 10 ** 7
DEFAULT_DEPTH_CAP = 10 ** 4

PRESETS = ("odometer", "chacon", "heavy2q")

_BASE_CHAR = "B"
_SPACER_CHAR = "s"


@dataclass(frozen=True)
class Stage:
    """One cutting stage: cut count c >= 2 and c spacer entries.

    A spacer entry is a nonnegative integer or the token "2q", which
    evaluates to twice the current tower height when the stage is applied.
    """

    c: int
    spacers: tuple

    def __post_init__(self):
        if self.c < 2:
            raise ConfigError(f"cut count must be >= 2, got {self.c}")
        if len(self.spacers) != self.c:
            raise ConfigError(
                f"stage with c={self.c} needs {self.c} spacer entries, "
                f"got {len(self.spacers)}")
        for s in self.spacers:
            if s == SPACER_TOKEN:
                continue
            if not isinstance(s, int) or isinstance(s, bool) or s < 0:
                raise ConfigError(f"spacer entries must be ints >= 0 or '2q', got {s!r}")


@dataclass(frozen=True)
class ConstructionData:
    """Stage data, finitely listed with an optional repeating suffix.

    ``repeat_from`` is a 0-based index into ``stages``; stages from that
    index onward repeat cyclically forever.  Without it the data is finite
    and deep queries raise StageDataExhaustedError.
    """

    stages: tuple[Stage, ...]
    repeat_from: int | None = None
    name: str | None = None

    def __post_init__(self):
        if not self.stages:
            raise ConfigError("at least one stage is required")
        if self.repeat_from is not None and not (
                0 <= self.repeat_from < len(self.stages)):
            raise ConfigError(
                f"repeat_from {self.repeat_from} out of range for "
                f"{len(self.stages)} stages")

    def stage(self, n: int) -> Stage:
        """Stage n (1-based)."""
        if n < 1:
            raise ValueError("stage index is 1-based")
        if n <= len(self.stages):
            return self.stages[n - 1]
        if self.repeat_from is None:
            raise StageDataExhaustedError(
                f"construction {self.name or ''} lists {len(self.stages)} stages "
                f"without a repeating suffix; stage {n} is undefined")
        cycle = len(self.stages) - self.repeat_from
        return self.stages[self.repeat_from + (n - 1 - self.repeat_from) % cycle]

    @classmethod
    def from_dict(cls, doc: dict, name: str | None = None) -> "ConstructionData":
        try:
            stages = tuple(
                Stage(int(st["c"]), tuple(
                    s if s == SPACER_TOKEN else int(s) for s in st["spacers"]))
                for st in doc["stages"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed construction data: {exc}") from exc
        repeat = doc.get("repeat_from")
        return cls(stages, None if repeat is None else int(repeat),
                   doc.get("name", name))

    def to_dict(self) -> dict:
        doc = {
            "stages": [{"c": st.c, "spacers": list(st.spacers)} for st in self.stages],
            "repeat_from": self.repeat_from,
        }
        if self.name is not None:
            doc["name"] = self.name
        return doc

    @classmethod
    def from_json(cls, text: str, name: str | None = None) -> "ConstructionData":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"construction data is not valid JSON: {exc}") from exc
        return cls.from_dict(doc, name)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def load_preset(name: str) -> ConstructionData:
    """Load one of the shipped fixtures: odometer, chacon, heavy2q."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; have {', '.join(PRESETS)}")
    text = resources.files("ergosum").joinpath("presets", f"{name}.json").read_text()
    return ConstructionData.from_json(text, name=name)


class Tower:
    """Lazily extended tower bookkeeping for one construction.

    Maintains exact heights q_n, cut products C_n, resolved spacer rows,
    spacer mass partial sums, and memoized per-level prefix counts.  Safe
    to share between samplers of the same construction: everything here is
    append-only and derived deterministically from the data.
    """

    _SMALL_WORD_LIMIT = 4096

    def __init__(self, data: ConstructionData):
        self.data = data
        self._c: list[int] = []            # c_n, stage n = index + 1
        self._spacers: list[tuple[int, ...]] = []
        self._q: list[int] = [1]           # q_n, level n = index + 1
        self._cut_product: list[int] = []  # C_n
        self._mass: list[Fraction] = []    # sum_{m<=n} (1/C_m) sum_k S_{m,k}
        self._prefix_memo: dict[tuple[int, int], int] = {}
        self._small_words: dict[int, np.ndarray] = {}

    # -- stage/height access (1-based) --------------------------------

    def ensure_stage(self, n: int) -> None:
        """Resolve stages 1..n (and heights q_1..q_{n+1})."""
        while len(self._c) < n:
            m = len(self._c) + 1
            stage = self.data.stage(m)
            q_m = self._q[m - 1]
            resolved = tuple(2 * q_m if s == SPACER_TOKEN else s for s in stage.spacers)
            self._c.append(stage.c)
            self._spacers.append(resolved)
            self._q.append(stage.c * q_m + sum(resolved))
            prev_cut = self._cut_product[-1] if self._cut_product else 1
            self._cut_product.append(prev_cut * stage.c)
            prev_mass = self._mass[-1] if self._mass else Fraction(0)
            self._mass.append(
                prev_mass + Fraction(sum(resolved), self._cut_product[-1]))

    def ensure_level(self, level: int) -> None:
        """Resolve enough stages that q_1..q_level exist."""
        if level >= 2:
            self.ensure_stage(level - 1)

    def q(self, level: int) -> int:
        self.ensure_level(level)
        return self._q[level - 1]

    def c(self, stage: int) -> int:
        self.ensure_stage(stage)
        return self._c[stage - 1]

    def spacers(self, stage: int) -> tuple[int, ...]:
        self.ensure_stage(stage)
        return self._spacers[stage - 1]

    def cut_product(self, stage: int) -> int:
        self.ensure_stage(stage)
        return self._cut_product[stage - 1]

    def spacer_mass(self, stage: int) -> Fraction:
        self.ensure_stage(stage)
        return self._mass[stage - 1]

    def base_count(self, level: int) -> int:
        """Number of base symbols in the level word (C_{level-1}, C_0 = 1)."""
        return 1 if level == 1 else self.cut_product(level - 1)

    # -- hierarchical prefix counting ----------------------------------

    def prefix_base_count(self, level: int, j) -> int:
        """Base symbols among the first j positions of the level word.

        Descends one level per iteration; at most c segment steps per
        level, never materializing anything.
        """
        j = int(j)
        if j < 0 or j > self.q(level):
            raise ValueError(f"prefix index {j} outside level {level} word")
        key = (level, j)
        cached = self._prefix_memo.get(key)
        if cached is not None:
            return cached
        total = 0
        lev, pos_j = level, j
        while True:
            if pos_j <= 0:
                break
            if pos_j >= self.q(lev):
                total += self.base_count(lev)
                break
            if lev == 1:
                # q_1 = 1 and 0 < j < 1 cannot happen; guarded above
                raise InvariantViolationError("prefix descent reached level 1 interior")
            stage = lev - 1
            q_sub = self.q(lev - 1)
            bases_sub = self.base_count(lev - 1)
            spacer_row = self.spacers(stage)
            pos = 0
            descended = False
            for k in range(self.c(stage)):
                nxt = pos + q_sub
                if pos_j < nxt:
                    total += k * bases_sub
                    lev, pos_j = lev - 1, pos_j - pos
                    descended = True
                    break
                pos = nxt + spacer_row[k]
                if pos_j <= pos:
                    total += (k + 1) * bases_sub
                    pos_j = 0
                    descended = True
                    break
            if not descended:
                raise InvariantViolationError("prefix descent fell off the word")
            if pos_j == 0:
                break
        self._prefix_memo[key] = total
        return total

    def symbol_at(self, level: int, j) -> int:
        """Symbol (BASE/SPACER) at position j of the level word."""
        return self.prefix_base_count(level, int(j) + 1) - self.prefix_base_count(level, int(j))

    # -- window extraction ---------------------------------------------

    def _small_word(self, level: int) -> np.ndarray:
        word = self._small_words.get(level)
        if word is None:
            word = _expand(self, level)
            self._small_words[level] = word
        return word

    def extract(self, level: int, j0, j1) -> np.ndarray:
        """Symbols of the level word on positions [j0, j1), as a uint8 array."""
        j0, j1 = int(j0), int(j1)
        if j0 < 0 or j1 > self.q(level) or j0 > j1:
            raise ValueError("extraction range outside level word")
        out = np.zeros(j1 - j0, dtype=np.uint8)
        stack = [(level, j0, j1, 0)]
        while stack:
            lev, a, b, off = stack.pop()
            if b <= a:
                continue
            if lev == 1:
                out[off] = BASE
                continue
            if self.q(lev) <= self._SMALL_WORD_LIMIT:
                out[off:off + (b - a)] = self._small_word(lev)[a:b]
                continue
            stage = lev - 1
            q_sub = self.q(lev - 1)
            spacer_row = self.spacers(stage)
            pos = 0
            for k in range(self.c(stage)):
                seg_a, seg_b = pos, pos + q_sub
                lo, hi = max(a, seg_a), min(b, seg_b)
                if lo < hi:
                    stack.append((lev - 1, lo - seg_a, hi - seg_a, off + (lo - a)))
                pos = seg_b + spacer_row[k]
                if pos >= b:
                    break
        return out


@dataclass(frozen=True)
class TowerStats:
    """Exact tower quantities through a given stage.

    q[i] is the height of level i+1, C[i] the cut product through stage
    i+1, and spacer_mass_partial[i] the exact partial sum of
    (1/C_m) * sum_k S_{m,k} through stage i+1.  The total measure of the
    ambient interval is 1 + lim spacer_mass_partial, possibly infinite.
    """

    q: tuple[int, ...]
    C: tuple[int, ...]
    spacer_mass_partial: tuple[Fraction, ...]

    def total_measure_partial(self) -> Fraction:
        return 1 + self.spacer_mass_partial[-1]


def tower_stats(data: ConstructionData, n_max: int, tower: Tower | None = None) -> TowerStats:
    """Exact heights, cut products, and spacer mass through stage n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    tower = tower or Tower(data)
    tower.ensure_stage(n_max)
    return TowerStats(
        q=tuple(tower.q(n) for n in range(1, n_max + 1)),
        C=tuple(tower.cut_product(n) for n in range(1, n_max + 1)),
        spacer_mass_partial=tuple(tower.spacer_mass(n) for n in range(1, n_max + 1)),
    )


@dataclass(eq=False)
class SymbolicWord:
    """Materialized level word over {base, spacer} (1 = base)."""

    symbols: np.ndarray
    level: int

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def base_count(self) -> int:
        return int(self.symbols.sum(dtype=np.int64))

    def to_string(self) -> str:
        return "".join(_BASE_CHAR if s else _SPACER_CHAR for s in self.symbols)

    def __repr__(self):
        head = self.to_string() if len(self) <= 40 else self.to_string()[:37] + "..."
        return f"SymbolicWord(level={self.level}, len={len(self)}, {head!r})"


def _expand(tower: Tower, n: int) -> np.ndarray:
    word = np.ones(1, dtype=np.uint8)
    for m in range(1, n):
        parts = []
        for s in tower.spacers(m):
            parts.append(word)
            if s:
                parts.append(np.zeros(s, dtype=np.uint8))
        word = np.concatenate(parts)
    return word


def expand_word(data: ConstructionData, n: int,
                budget: int = DEFAULT_EXPANSION_BUDGET,
                tower: Tower | None = None) -> SymbolicWord:
    """Materialize the level-n word; errors if q_n exceeds the budget."""
    if n < 1:
        raise ValueError("level must be >= 1")
    tower = tower or Tower(data)
    height = tower.q(n)
    if height > budget:
        raise ExpansionBudgetError(n, height, budget)
    return SymbolicWord(_expand(tower, n), n)


class WindowCounts(NamedTuple):
    """Base occurrences left of, at, and right of the window center."""

    left: int
    center: int
    right: int

    @property
    def sigma(self) -> int:
        return self.left + self.center + self.right

    @property
    def s_plus(self) -> int:
        return self.center + self.right

    @property
    def s_minus(self) -> int:
        return self.center + self.left


class NameSampler:
    """Lazy bi-infinite symbolic name of a random base point.

    Stage-n columns have equal width, so conditioned on the base the
    column choices k_n are i.i.d. uniform on {1..c_n}; they are drawn on
    demand, one per level, in level order, making every downstream count
    deterministic given the seed.  Single-threaded: parallel experiments
    use one sampler per stream.
    """

    def __init__(self, data: ConstructionData, seed,
                 choices: Sequence[int] | None = None,
                 tower: Tower | None = None):
        self.data = data
        self.tower = tower or Tower(data)
        self._rng = normalize(seed)
        self._forced = list(choices or ())
        self.column_choices: list[int] = []
        self._offsets: list[int] = [0]

    @property
    def level(self) -> int:
        return len(self._offsets)

    def center_offset(self, level: int | None = None) -> int:
        level = self.level if level is None else level
        if level > self.level:
            raise ValueError("level not realized yet")
        return self._offsets[level - 1]

    def ensure_level(self, level: int) -> None:
        while self.level < level:
            stage = self.level
            c = self.tower.c(stage)
            if len(self.column_choices) < stage:
                if self._forced:
                    k = int(self._forced.pop(0))
                    if not 1 <= k <= c:
                        raise ConfigError(f"forced choice {k} outside 1..{c}")
                else:
                    k = int(self._rng.integers(1, c + 1))
                self.column_choices.append(k)
            k = self.column_choices[stage - 1]
            q_m = self.tower.q(stage)
            spacer_row = self.tower.spacers(stage)
            offset = self._offsets[-1] + (k - 1) * q_m + sum(spacer_row[: k - 1])
            self._offsets.append(offset)

    def ensure_window(self, radius: int, depth_cap: int = DEFAULT_DEPTH_CAP) -> int:
        """Extend levels until [center-radius, center+radius] sits inside the word.

        Returns the embedding level.  Raises DepthCapError past depth_cap
        levels (possible only while the point keeps landing within radius
        of a word boundary, probability <= 2**(1-extra levels)).
        """
        if radius < 0:
            raise ValueError("radius must be >= 0")
        while True:
            lev = self.level
            off = self._offsets[-1]
            if off >= radius and off + radius <= self.tower.q(lev) - 1:
                return lev
            if lev >= depth_cap:
                raise DepthCapError(radius, depth_cap)
            self.ensure_level(lev + 1)

    def window_array(self, lo: int, hi: int, depth_cap: int = DEFAULT_DEPTH_CAP) -> np.ndarray:
        """Symbols at positions center+lo .. center+hi of the name."""
        if lo > hi:
            raise ValueError("empty window")
        lev = self.ensure_window(max(-lo, hi, 0), depth_cap)
        off = self.center_offset(lev)
        return self.tower.extract(lev, off + lo, off + hi + 1)


def sample_name(data: ConstructionData, seed,
                choices: Sequence[int] | None = None) -> NameSampler:
    """Sampler for the symbolic name of a random base point."""
    return NameSampler(data, seed, choices=choices)


def window_counts(sampler: NameSampler, radius: int,
                  depth_cap: int = DEFAULT_DEPTH_CAP) -> WindowCounts:
    """Base occurrences in [-radius, -1], {0}, [1, radius] around the center."""
    lev = sampler.ensure_window(radius, depth_cap)
    off = sampler.center_offset(lev)
    tower = sampler.tower
    at_center = tower.prefix_base_count(lev, off + 1) - tower.prefix_base_count(lev, off)
    if at_center != 1:
        raise InvariantViolationError(
            f"center symbol at level {lev} offset {off} is not base")
    left = tower.prefix_base_count(lev, off) - tower.prefix_base_count(lev, off - radius)
    right = tower.prefix_base_count(lev, off + radius + 1) - tower.prefix_base_count(lev, off + 1)
    return WindowCounts(left, 1, right)


def rank_one_scaling(data: ConstructionData, tower: Tower | None = None) -> ScalingSequence:
    """Step-function normalizer: a(n) = C_v on q_v <= n < q_{v+1}.

    Nondecreasing and right-continuous in n; values are exact integers.
    """
    tower = tower or Tower(data)

    def query(n: int) -> int:
        if n < 1:
            raise ValueError("scaling index must be >= 1")
        level = 1
        while tower.q(level + 1) <= n:
            level += 1
        return tower.cut_product(level)

    return ScalingSequence(query, name=f"rankone[{data.name or 'custom'}]")


@dataclass(frozen=True)
class CorrelationEstimate:
    """Window estimates of the base auto-correlations.

    u_hat[k] = (#positions i in the window with base at i and i+k) /
    (#base positions in the window); right endpoints extend past the
    window so a full-base name gives exactly 1 at every lag.  ``se``
    is a crude independent-pairs standard error, adequate for comparing
    two seeds but not a rigorous confidence radius.
    """

    window_radius: int
    lags: tuple[int, ...]
    u_hat: tuple[float, ...]
    pair_counts: tuple[int, ...]
    base_count: int
    se: tuple[float, ...]


def correlation_ratio_estimate(data: ConstructionData, seed, window_radius: int,
                               lags: Sequence[int],
                               depth_cap: int = DEFAULT_DEPTH_CAP) -> CorrelationEstimate:
    """Estimate base pair correlations at the given lags from one name window."""
    lags = tuple(int(k) for k in lags)
    if any(k < 0 for k in lags):
        raise ValueError("lags must be >= 0")
    max_lag = max(lags, default=0)
    if window_radius < max_lag:
        raise ValueError("window_radius must cover the largest lag")
    sampler = sample_name(data, seed)
    arr = sampler.window_array(-window_radius, window_radius + max_lag, depth_cap)
    span = 2 * window_radius + 1
    window = arr[:span]
    base = int(window.sum(dtype=np.int64))
    pair_counts = []
    u_hat = []
    se = []
    for k in lags:
        pairs = int(np.sum(window & arr[k:k + span], dtype=np.int64))
        pair_counts.append(pairs)
        u = pairs / base
        u_hat.append(u)
        se.append((u * (1.0 - u) / base) ** 0.5)
    return CorrelationEstimate(window_radius, lags, tuple(u_hat),
                               tuple(pair_counts), base, tuple(se))
