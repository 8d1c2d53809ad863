"""Timing harness: direct convolution elimination vs the FFT dual route.

Each template is a convolutional graph whose leaves are marginalized and
whose interior variables carry evidence, so every elimination step on the
direct route performs real convolutions over domains of size ``A``.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import Factor, Semantics, Variable, rel_linf
from .graph import FactorGraph
from .inference import Query, cfg_eliminate, cfg_push_marginalization, fft_query

__all__ = ["BenchRow", "BenchReport", "make_template", "run_bench"]


@dataclass
class BenchRow:
    A: int
    t_direct: float
    t_fft: float
    deviation: float

    @property
    def ratio(self) -> float:
        return self.t_direct / self.t_fft

    @property
    def predicted(self) -> float:
        return self.A / math.log2(self.A) if self.A > 1 else float("nan")


@dataclass
class BenchReport:
    template: str
    length: int
    repetitions: int
    rows: list[BenchRow] = field(default_factory=list)

    COLUMNS = ("A", "t_direct", "t_fft", "ratio", "A_over_log2A", "deviation")

    def records(self) -> list[tuple]:
        return [(r.A, r.t_direct, r.t_fft, r.ratio, r.predicted, r.deviation) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        writer.writerows(self.records())
        return buf.getvalue()

    def table(self) -> str:
        head = f"{'A':>6} {'t_direct[s]':>12} {'t_fft[s]':>12} {'ratio':>9} {'A/log2A':>9} {'deviation':>10}"
        lines = [f"# template={self.template} length={self.length} reps={self.repetitions}", head]
        for a, td, tf, ratio, pred, dev in self.records():
            lines.append(f"{a:>6} {td:>12.6f} {tf:>12.6f} {ratio:>9.2f} {pred:>9.2f} {dev:>10.2e}")
        return "\n".join(lines)


def make_template(template: str, length: int, size: int, rng: np.random.Generator) -> tuple[FactorGraph, Query]:
    """A random positive graph and its benchmark query.

    ``chain``: f_j(x_j, x_{j+1}) for j = 1..length; the two ends are
    marginalized and every interior variable is observed.
    ``star``: f_j(x0, x_j); the leaves are marginalized and the hub observed.
    """
    if length < 1:
        raise ValueError("template length must be >= 1")
    if template == "chain":
        vs = [Variable(i, f"x{i + 1}", size) for i in range(length + 1)]
        scopes = [(vs[j], vs[j + 1]) for j in range(length)]
        marg = {vs[0].id, vs[-1].id}
        observed = [v.id for v in vs[1:-1]]
    elif template == "star":
        vs = [Variable(i, f"x{i}", size) for i in range(length + 1)]
        scopes = [(vs[0], vs[j]) for j in range(1, length + 1)]
        marg = {v.id for v in vs[1:]}
        observed = [vs[0].id]
    else:
        raise ValueError(f"unknown template {template!r}")
    factors = {
        f"f{j}": Factor(scope, rng.uniform(0.1, 1.0, size=(size, size)) / size)
        for j, scope in enumerate(scopes, 1)
    }
    g = FactorGraph(vs, factors, Semantics.CONVOLUTIONAL)
    evidence = {i: int(rng.integers(size)) for i in observed}
    return g, Query(frozenset(marg), evidence)


def _direct(g: FactorGraph, q: Query) -> Factor:
    return cfg_eliminate(cfg_push_marginalization(g, q.marginalize), q.evidence)


def _median_time(fn, reps: int) -> tuple[float, Factor]:
    times, result = [], None
    for _ in range(reps):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), result


def run_bench(
    template: str = "chain",
    length: int = 4,
    sizes=(16, 64, 256, 1024),
    reps: int = 3,
    seed: int = 0,
    tol: float = 1e-6,
) -> BenchReport:
    """Median times of both routes per domain size.

    The two answers are compared before timing; a gap above ``tol`` raises.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rng = np.random.default_rng(seed)
    report = BenchReport(template, length, reps)
    for a in sizes:
        g, q = make_template(template, length, a, rng)
        dev = rel_linf(fft_query(g, q), _direct(g, q))
        if dev > tol:
            raise AssertionError(f"direct and FFT answers differ by {dev:.3g} at A={a}")
        t_direct, _ = _median_time(lambda: _direct(g, q), reps)
        t_fft, _ = _median_time(lambda: fft_query(g, q), reps)
        report.rows.append(BenchRow(a, t_direct, t_fft, dev))
    return report
