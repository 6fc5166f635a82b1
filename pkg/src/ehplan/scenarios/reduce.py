"""Daily scenarios from a year of hourly data, and their reduction."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..model.types import SERIES_FIELDS, CostBreakdown, Scenario
from ._accel import kernels


class ReductionError(ValueError):
    """Bad input to slicing, distance or reduction routines."""


@dataclass(frozen=True, eq=False)
class YearSeries:
    """Hourly (or finer) records for one year, one array per channel."""

    load_e: np.ndarray
    load_h: np.ndarray
    load_c: np.ndarray
    wind_speed: np.ndarray
    irradiance: np.ndarray
    price_e: np.ndarray
    steps_per_day: int = 24

    def __post_init__(self):
        lengths = set()
        for name in SERIES_FIELDS:
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise ReductionError(f"{name} must be a finite one-dimensional series")
            if name != "price_e" and np.any(arr < 0):
                raise ReductionError(f"{name} has negative entries (first at record {int(np.argmax(arr < 0))})")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            lengths.add(arr.size)
        if len(lengths) != 1:
            raise ReductionError("channels differ in length")
        n = lengths.pop()
        if n == 0:
            raise ReductionError("year series is empty")
        if n % self.steps_per_day:
            raise ReductionError(f"{n} records do not split into whole days of {self.steps_per_day}")

    @property
    def n_records(self) -> int:
        return self.load_e.size

    @property
    def n_days(self) -> int:
        return self.n_records // self.steps_per_day

    def channel_matrix(self, name: str) -> np.ndarray:
        """``(days, steps)`` view of one channel."""
        return getattr(self, name).reshape(self.n_days, self.steps_per_day)


@dataclass(frozen=True)
class ScenarioSet:
    """Scenarios with the day each came from, or ``None`` for a centroid."""

    scenarios: tuple[Scenario, ...]
    origins: tuple[int | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "origins", tuple(self.origins))
        if not self.scenarios:
            raise ReductionError("empty scenario set")
        if len(self.origins) != len(self.scenarios):
            raise ReductionError("one origin per scenario is required")
        if len({sc.steps for sc in self.scenarios}) != 1:
            raise ReductionError("scenarios differ in step count")
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ReductionError(f"probabilities sum to {total!r}")

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def probs(self) -> np.ndarray:
        return np.array([sc.prob for sc in self.scenarios])

    @property
    def steps(self) -> int:
        return self.scenarios[0].steps

    @property
    def tags(self) -> list[str]:
        return [f"day{o}" if o is not None else f"centroid{i}" for i, o in enumerate(self.origins)]

    def channel(self, name: str) -> np.ndarray:
        return np.stack([getattr(sc, name) for sc in self.scenarios])


def slice_days(year: YearSeries) -> ScenarioSet:
    n = year.n_days
    mats = {name: year.channel_matrix(name) for name in SERIES_FIELDS}
    scenarios = tuple(
        Scenario(prob=1.0 / n, label=f"day{d}", **{name: mats[name][d] for name in SERIES_FIELDS})
        for d in range(n)
    )
    return ScenarioSet(scenarios, tuple(range(n)))


def price_varies(sset: ScenarioSet) -> bool:
    price = sset.channel("price_e")
    return bool(np.any(price != price[0]))


def feature_channels(sset: ScenarioSet, include_price: bool | None = None) -> tuple[str, ...]:
    if include_price is None:
        include_price = price_varies(sset)
    return tuple(c for c in SERIES_FIELDS if c != "price_e" or include_price)


def feature_matrix(sset: ScenarioSet, normalize: bool = True, include_price: bool | None = None) -> np.ndarray:
    """One row per scenario: the chosen channels concatenated.

    With ``normalize`` each channel is min-max scaled to [0, 1] over the
    whole set; a constant channel maps to zeros.
    """
    blocks = []
    for name in feature_channels(sset, include_price):
        m = sset.channel(name)
        if normalize:
            lo, hi = m.min(), m.max()
            m = (m - lo) / (hi - lo) if hi > lo else np.zeros_like(m)
        blocks.append(m)
    return np.ascontiguousarray(np.hstack(blocks), dtype=np.float64)


def kantorovich_matrix(sset: ScenarioSet, normalize: bool = True, include_price: bool | None = None) -> np.ndarray:
    """Pairwise Euclidean distance between scenario feature vectors."""
    if len(sset) < 2:
        raise ReductionError("distance matrix needs at least two scenarios")
    return kernels.pairwise_distances(feature_matrix(sset, normalize, include_price))


@dataclass
class ReductionTrace:
    """Removal order: ids are origins (day index) of the input scenarios,
    or positions when the input holds centroids."""

    removed: list[int] = field(default_factory=list)
    absorbed_by: list[int] = field(default_factory=list)
    pd_value: list[float] = field(default_factory=list)
    prob_mass: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.removed)

    def rows(self):
        for i, (r, a, v) in enumerate(zip(self.removed, self.absorbed_by, self.pd_value), 1):
            yield i, r, a, v

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "removed_id", "absorbed_by", "pd_value"])
            for i, r, a, v in self.rows():
                w.writerow([i, r, a, repr(float(v))])


def reduce_distances(D: np.ndarray, probs: np.ndarray, target: int):
    """Backward reduction on a precomputed distance matrix.

    Returns survivor positions, their probabilities, and the per-step
    ``(removed, absorbed, pd, mass)`` arrays where ``mass`` is the total
    probability after each step.
    """
    n = len(probs)
    if not 1 <= target <= n:
        raise ReductionError(f"target {target} outside [1, {n}]")
    D = np.ascontiguousarray(D, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    alive, p, removed, absorbed, pd = kernels.backward_reduce(D, probs, int(target))
    # replay the transfers to record the mass after every step
    q = probs.copy()
    mass = np.empty(len(removed))
    for it, (i, j) in enumerate(zip(removed, absorbed)):
        q[j] += q[i]
        q[i] = 0.0
        mass[it] = q.sum()
    keep = np.flatnonzero(alive)
    return keep, p[keep], removed, absorbed, pd, mass


def backward_reduce(sset: ScenarioSet, target: int, normalize: bool = True,
                    include_price: bool | None = None) -> tuple[ScenarioSet, ReductionTrace]:
    n = len(sset)
    if not 1 <= target <= n:
        raise ReductionError(f"target {target} outside [1, {n}]")
    if target == n:
        return sset, ReductionTrace()
    if n == 1:
        D = np.zeros((1, 1))
    else:
        D = kantorovich_matrix(sset, normalize, include_price)
    keep, p, removed, absorbed, pd, mass = reduce_distances(D, sset.probs, target)
    ids = [o if o is not None else i for i, o in enumerate(sset.origins)]
    trace = ReductionTrace(
        removed=[ids[i] for i in removed],
        absorbed_by=[ids[j] for j in absorbed],
        pd_value=[float(v) for v in pd],
        prob_mass=[float(v) for v in mass],
    )
    # exact sum; the last survivor absorbs rounding so the set validates
    p = p / p.sum()
    scen = tuple(sset.scenarios[i].with_prob(float(pi)) for i, pi in zip(keep, p))
    return ScenarioSet(scen, tuple(sset.origins[i] for i in keep)), trace


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rest[0])
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans_labels(X: np.ndarray, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-6):
    """Lloyd iterations from k-means++ seeds; returns labels and WCSS."""
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ReductionError(f"k={k} outside [1, {n}]")
    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, k, rng)
    labels, wcss = kernels.kmeans_assign(X, C)
    for _ in range(max_iter):
        new = C.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = X[members].mean(axis=0)
        shift = np.sqrt(((new - C) ** 2).sum(axis=1)).max()
        C = new
        labels, wcss = kernels.kmeans_assign(X, C)
        if shift <= tol:
            break
    return labels, wcss


def kmeans_reduce(sset: ScenarioSet, k: int, seed: int = 0, normalize: bool = True,
                  include_price: bool | None = None, max_iter: int = 300, tol: float = 1e-6) -> ScenarioSet:
    """Cluster days; each non-empty cluster becomes its raw-space mean with
    probability equal to the member fraction."""
    X = feature_matrix(sset, normalize, include_price)
    labels, _ = kmeans_labels(X, k, seed, max_iter, tol)
    n = len(sset)
    scen = []
    for j in range(k):
        members = np.flatnonzero(labels == j)
        if members.size == 0:
            continue
        series = {name: sset.channel(name)[members].mean(axis=0) for name in SERIES_FIELDS}
        scen.append(Scenario(prob=members.size / n, label=f"centroid{len(scen)}", **series))
    return ScenarioSet(tuple(scen), (None,) * len(scen))


DEVIATION_COMPONENTS = ("IC", "TC", "MC", "LC", "CVaR", "Total")


def deviation_report(full: CostBreakdown, reduced: CostBreakdown) -> dict[str, float | str]:
    """Signed percentage deviation of each component; positive means the
    reduced set overstates the full-set figure."""
    if (full.alpha, full.beta) != (reduced.alpha, reduced.beta):
        raise ReductionError("breakdowns were computed with different risk settings")
    a, b = full.components(), reduced.components()
    out: dict[str, float | str] = {}
    for name in DEVIATION_COMPONENTS:
        out[name] = "n/a" if a[name] == 0 else 100.0 * (b[name] - a[name]) / a[name]
    return out
