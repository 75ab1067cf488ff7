"""Experiment reports and two-sample statistics."""

from __future__ import annotations

import dataclasses
import json
import math
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import __version__

P_THRESHOLD = 0.01


class SampleSizeError(ValueError):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class TwoSample:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).ravel())
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).ravel())
        if self.a.size == 0 or self.b.size == 0:
            raise SampleSizeError("both samples must be nonempty")


class KSResult(NamedTuple):
    statistic: float
    p_value: float


def ks_two_sample(s: TwoSample) -> KSResult:
    """Two-sided Kolmogorov-Smirnov test with the asymptotic p-value."""
    if s.a.size < 25 or s.b.size < 25:
        raise SampleSizeError("KS test needs at least 25 points per sample")
    r = stats.ks_2samp(s.a, s.b, alternative="two-sided", method="asymp")
    return KSResult(float(r.statistic), float(r.pvalue))


@dataclasses.dataclass
class Estimate:
    label: str
    value: float
    stderr: float


@dataclasses.dataclass
class Statistic:
    label: str
    kind: str
    value: float
    p_value: float


@dataclasses.dataclass
class Verdict:
    criterion: str
    passed: bool
    threshold: str


@dataclasses.dataclass
class ExperimentReport:
    name: str
    config: dict
    params: dict
    estimates: list = dataclasses.field(default_factory=list)
    statistics: list = dataclasses.field(default_factory=list)
    verdicts: list = dataclasses.field(default_factory=list)
    diagnostics: dict = dataclasses.field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def estimate(self, label) -> Estimate:
        for e in self.estimates:
            if e.label == label:
                return e
        raise KeyError(label)

    def statistic(self, label) -> Statistic:
        for s in self.statistics:
            if s.label == label:
                return s
        raise KeyError(label)

    def add_estimate(self, label, value, stderr):
        self.estimates.append(Estimate(label, float(value), float(stderr)))

    def add_ks(self, label, a, b, threshold=P_THRESHOLD):
        r = ks_two_sample(TwoSample(a, b))
        self.statistics.append(Statistic(label, "KS", r.statistic, r.p_value))
        self.verdicts.append(Verdict(label, r.p_value > threshold, f"p > {threshold}"))
        return r

    def check(self, criterion, passed, threshold):
        self.verdicts.append(Verdict(criterion, bool(passed), threshold))

    def merge(self, other: "ExperimentReport", prefix):
        """Fold another report in, prefixing its labels."""
        for e in other.estimates:
            self.estimates.append(Estimate(f"{prefix}{e.label}", e.value, e.stderr))
        for s in other.statistics:
            self.statistics.append(Statistic(f"{prefix}{s.label}", s.kind, s.value, s.p_value))
        for v in other.verdicts:
            self.verdicts.append(Verdict(f"{prefix}{v.criterion}", v.passed, v.threshold))
        for k, val in other.diagnostics.items():
            self.diagnostics[f"{prefix}{k}"] = val
        self.wall_time += other.wall_time

    def to_dict(self, include_wall_time=False):
        d = {
            "name": self.name,
            "version": __version__,
            "config": self.config,
            "params": self.params,
            "estimates": [dataclasses.asdict(e) for e in self.estimates],
            "statistics": [dataclasses.asdict(s) for s in self.statistics],
            "verdicts": [dataclasses.asdict(v) for v in self.verdicts],
            "diagnostics": self.diagnostics,
            "passed": self.passed,
        }
        if include_wall_time:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_wall_time=False):
        # wall time is left out by default so identical runs give identical bytes
        return json.dumps(_clean(self.to_dict(include_wall_time)), indent=2, allow_nan=True) + "\n"

    def to_text(self):
        lines = [f"experiment: {self.name}"]
        if self.estimates:
            w = max(len(e.label) for e in self.estimates)
            lines.append("estimates:")
            for e in self.estimates:
                lines.append(f"  {e.label:<{w}}  {e.value: .6g}  +/- {e.stderr:.3g}")
        if self.statistics:
            w = max(len(s.label) for s in self.statistics)
            lines.append("statistics:")
            for s in self.statistics:
                lines.append(f"  {s.label:<{w}}  {s.kind:<5} {s.value:.4g}  p={s.p_value:.4g}")
        if self.verdicts:
            w = max(len(v.criterion) for v in self.verdicts)
            lines.append("verdicts:")
            for v in self.verdicts:
                lines.append(f"  {v.criterion:<{w}}  {'PASS' if v.passed else 'FAIL'}  ({v.threshold})")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def mean_stderr(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def batch_means(x, n_batches=20):
    """Mean and batch-means standard error of a correlated series."""
    x = np.asarray(x, dtype=float)
    m = x.size // n_batches
    if m < 1:
        raise SampleSizeError("series shorter than the number of batches")
    bm = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(bm.mean()), float(bm.std(ddof=1) / math.sqrt(n_batches))
