"""Declarative parameter sweeps producing ordered numeric tables.

A :class:`ScenarioConfig` names a sweep kind, a chain template and the grids
to scan.  :func:`run_scenario` evaluates every grid point independently
(optionally in worker processes) and assembles rows in grid order, so the
CSV written by :func:`write_csv` is byte-identical between runs.

Grid points that produce an invalid or unstable chain are kept as rows with
NaN values and a non-zero ``status``:

    0  ok
    1  unstable chain (potential not positive definite)
    2  invalid chain specification (e.g. coupling range exceeds the ring)
    3  other numerical failure
"""

from __future__ import annotations

import enum
import functools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .chain import (
    ChainSpec,
    Topology,
    build_potential,
    classical_correlations,
    covariance,
    ground_energy,
)
from .errors import NumericalError, UnstableChainError, ValidationError
from .negativity import (
    bisection,
    chain_negativity,
    even_odd,
    even_odd_negativity,
    even_odd_rate,
    nn_closed_form,
    q_spectrum,
    separated_blocks,
)

OK, UNSTABLE, INVALID, FAILED = 0, 1, 2, 3
PLATEAU_TRUNCATION = 64
NAN = math.nan


class ScenarioKind(str, enum.Enum):
    BISECTION_GRID = "BisectionGrid"
    CONVERGENCE_RATIO = "ConvergenceRatio"
    ENERGY_VS_NEGATIVITY = "EnergyVsNegativity"
    EVEN_ODD_SCALING = "EvenOddScaling"
    SEPARATION_SCAN = "SeparationScan"
    CLASSICAL_CORRELATIONS = "ClassicalCorrelations"
    THERMAL_SCAN = "ThermalScan"
    Q_SPECTRUM_SCAN = "QSpectrumScan"
    TERMINATED_GRID = "TerminatedGrid"


COLUMNS = {
    ScenarioKind.BISECTION_GRID: ("alpha", "n1", "n2", "N", "status"),
    ScenarioKind.TERMINATED_GRID: ("alpha", "n1", "n2", "N", "status"),
    ScenarioKind.CONVERGENCE_RATIO: ("alpha", "n1", "n2", "N", "N_inf", "ratio", "status"),
    ScenarioKind.ENERGY_VS_NEGATIVITY: (
        "alpha", "n", "energy_per_oscillator", "N", "negativity",
        "energy_per_negativity", "status",
    ),
    ScenarioKind.EVEN_ODD_SCALING: ("alpha", "n", "N", "N_closed", "N_per_n", "rate", "status"),
    ScenarioKind.SEPARATION_SCAN: ("alpha", "size", "separation", "N", "status"),
    ScenarioKind.CLASSICAL_CORRELATIONS: ("alpha", "j", "distance", "correlation", "status"),
    ScenarioKind.THERMAL_SCAN: ("alpha", "n", "T", "N", "status"),
    ScenarioKind.Q_SPECTRUM_SCAN: ("alpha", "rank", "q", "q_minus_one", "status"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One sweep.

    ``chain`` supplies the couplings, topology and temperature shared by all
    grid points (its ``n`` is used when the kind has no ``n`` grid).
    ``ranges`` maps grid names to tuples of values; ``alpha`` sweeps replace
    the nearest-neighbour coupling and keep any longer-range ones.
    """

    kind: ScenarioKind
    chain: ChainSpec
    ranges: dict[str, tuple] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        ranges = {k: tuple(v) for k, v in self.ranges.items()}
        for name, values in ranges.items():
            if not values:
                raise ValidationError(f"range {name!r} is empty")
        object.__setattr__(self, "ranges", ranges)

    def grid(self, name: str, default) -> tuple:
        return self.ranges.get(name, tuple(default))

    def echo(self) -> dict:
        return {
            "kind": self.kind.value,
            "chain": {
                "n": self.chain.n,
                "couplings": list(self.chain.couplings),
                "topology": self.chain.topology.value,
                "beta": _json_float(self.chain.beta),
            },
            "ranges": {k: [_json_float(x) for x in v] for k, v in sorted(self.ranges.items())},
            "options": dict(sorted(self.options.items())),
        }


def _json_float(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple[float, ...]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValidationError(
                    f"row of arity {len(row)} does not match {len(self.columns)} columns"
                )

    @property
    def kind(self) -> ScenarioKind | None:
        k = self.metadata.get("kind")
        return ScenarioKind(k) if k else None

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)


# -- grid evaluation ---------------------------------------------------------


def _with_alpha(chain: ChainSpec, alpha) -> tuple[float, ...]:
    if alpha is None:
        return chain.couplings
    return (float(alpha),) + tuple(chain.couplings[1:])


def _alpha_of(couplings) -> float:
    return couplings[0] if couplings else 0.0


@functools.lru_cache(maxsize=128)
def _cached_covariance(spec: ChainSpec):
    return covariance(spec)


def _status_of(exc: Exception) -> int:
    if isinstance(exc, UnstableChainError):
        return UNSTABLE
    if isinstance(exc, ValidationError):
        return INVALID
    return FAILED


def _guarded(fn, width: int, lead: tuple) -> list[tuple]:
    """Run ``fn`` -> list of value tuples; failures become one NaN row."""
    try:
        return [lead + tuple(vals) + (OK,) for vals in fn()]
    except (NumericalError, ValidationError) as exc:
        return [lead + (NAN,) * width + (_status_of(exc),)]


def _plateau(couplings, chain: ChainSpec) -> float:
    if len(couplings) <= 1:
        return nn_closed_form(_alpha_of(couplings))
    m = PLATEAU_TRUNCATION
    spec = ChainSpec(2 * m, couplings, Topology.RING, chain.beta)
    return chain_negativity(spec, bisection(m, m), _cached_covariance(spec)).log_negativity


def _evaluate(kind: ScenarioKind, chain: ChainSpec, point: dict) -> list[tuple]:
    couplings = _with_alpha(chain, point.get("alpha"))
    alpha = _alpha_of(couplings)
    K = ScenarioKind

    def spec_for(n, topology=chain.topology):
        return ChainSpec(n, couplings, topology, chain.beta)

    if kind in (K.BISECTION_GRID, K.TERMINATED_GRID):
        n1, n2 = point["n1"], point["n2"]
        topo = Topology.TERMINATED if kind is K.TERMINATED_GRID else chain.topology

        def fn():
            spec = spec_for(n1 + n2, topo)
            yield (chain_negativity(spec, bisection(n1, n2), _cached_covariance(spec)).log_negativity,)

        return _guarded(fn, 1, (alpha, n1, n2))

    if kind is K.CONVERGENCE_RATIO:
        n1, n2 = point["n1"], point["n2"]

        def fn():
            spec = spec_for(n1 + n2)
            n = chain_negativity(spec, bisection(n1, n2), _cached_covariance(spec)).log_negativity
            ref = _plateau(couplings, chain)
            yield (n, ref, n / ref if ref > 0 else NAN)

        return _guarded(fn, 3, (alpha, n1, n2))

    if kind is K.ENERGY_VS_NEGATIVITY:
        n = point["n"]

        def fn():
            spec = spec_for(n)
            e = ground_energy(build_potential(spec)) / n
            ln = chain_negativity(spec, bisection(n // 2, n // 2), _cached_covariance(spec))
            yield (e, ln.log_negativity, ln.negativity, e / ln.negativity)

        return _guarded(fn, 4, (alpha, n))

    if kind is K.EVEN_ODD_SCALING:
        n = point["n"]
        general_max = point["general_max_n"]

        def fn():
            spec = spec_for(n, Topology.RING)
            closed = even_odd_negativity(n, couplings)
            general = NAN
            if n <= general_max:
                general = chain_negativity(spec, even_odd(n), _cached_covariance(spec)).log_negativity
            rate = even_odd_rate(alpha) if len(couplings) == 1 and alpha > 0 else NAN
            yield (general, closed, closed / n, rate)

        return _guarded(fn, 4, (alpha, n))

    if kind is K.SEPARATION_SCAN:
        s, sep = point["size"], point["separation"]

        def fn():
            spec = spec_for(chain.n)
            yield (chain_negativity(spec, separated_blocks(s, sep), _cached_covariance(spec)).log_negativity,)

        return _guarded(fn, 1, (alpha, s, sep))

    if kind is K.CLASSICAL_CORRELATIONS:
        n = chain.n

        def fn():
            row = classical_correlations(build_potential(spec_for(n, Topology.RING)))
            for j in range(n):
                yield (j + 1, min(j, n - j), row[j])

        return _guarded(fn, 3, (alpha,))

    if kind is K.THERMAL_SCAN:
        n, t = point["n"], point["T"]

        def fn():
            spec = ChainSpec.from_temperature(n, couplings, chain.topology, t)
            yield (chain_negativity(spec, bisection(n // 2, n // 2), _cached_covariance(spec)).log_negativity,)

        return _guarded(fn, 1, (alpha, n, t))

    if kind is K.Q_SPECTRUM_SCAN:
        n = chain.n

        def fn():
            q = q_spectrum(build_potential(spec_for(n, Topology.RING)))
            for rank, val in enumerate(q, start=1):
                yield (rank, val, val - 1.0)

        return _guarded(fn, 3, (alpha,))

    raise ValidationError(f"unknown scenario kind {kind!r}")


def _default_alphas(cfg: ScenarioConfig) -> tuple:
    return cfg.grid("alpha", (None,))


def grid_points(cfg: ScenarioConfig) -> list[dict]:
    """Grid points in lexicographic order of the kind's ranges."""
    K = ScenarioKind
    kind, chain = cfg.kind, cfg.chain
    alphas = _default_alphas(cfg)
    pts: list[dict] = []
    if kind in (K.BISECTION_GRID, K.TERMINATED_GRID):
        for a in alphas:
            if "pairs" in cfg.ranges:
                pairs = cfg.ranges["pairs"]
            else:
                pairs = [(n1, n2) for n1 in cfg.grid("n1", range(1, 31)) for n2 in cfg.grid("n2", range(1, 31))]
            pts += [{"alpha": a, "n1": n1, "n2": n2} for n1, n2 in pairs]
    elif kind is K.CONVERGENCE_RATIO:
        for a in cfg.grid("alpha", (0.1, 1.0, 5.0, 20.0, 100.0)):
            for n2 in cfg.grid("n2", (20,)):
                pts += [{"alpha": a, "n1": n1, "n2": n2} for n1 in cfg.grid("n1", range(1, 41))]
    elif kind is K.ENERGY_VS_NEGATIVITY:
        default = tuple(float(x) for x in np.logspace(-2, 6, 33))
        for a in cfg.grid("alpha", default):
            pts += [{"alpha": a, "n": n} for n in cfg.grid("n", (chain.n,))]
    elif kind is K.EVEN_ODD_SCALING:
        gmax = int(cfg.options.get("general_max_n", 120))
        for a in alphas:
            pts += [{"alpha": a, "n": n, "general_max_n": gmax} for n in cfg.grid("n", range(4, 101, 4))]
    elif kind is K.SEPARATION_SCAN:
        n = chain.n
        for a in alphas:
            for s in cfg.grid("size", range(1, 9)):
                for sep in cfg.grid("separation", range(0, n)):
                    # separation is the smaller of the two gaps on the ring
                    if 2 * s + sep <= n and sep <= n - 2 * s - sep:
                        pts.append({"alpha": a, "size": s, "separation": sep})
    elif kind in (K.CLASSICAL_CORRELATIONS, K.Q_SPECTRUM_SCAN):
        pts = [{"alpha": a} for a in alphas]
    elif kind is K.THERMAL_SCAN:
        for a in alphas:
            for n in cfg.grid("n", (chain.n,)):
                pts += [{"alpha": a, "n": n, "T": t} for t in cfg.grid("T", np.linspace(0.0, 5.0, 51))]
    else:
        raise ValidationError(f"unknown scenario kind {kind!r}")
    if not pts:
        raise ValidationError(f"scenario {kind.value} has an empty grid")
    return pts


def _evaluate_packed(args):
    return _evaluate(*args)


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> ResultTable:
    """Evaluate every grid point; rows come back in grid order.

    With ``workers > 1`` points are farmed out to a process pool; ``map``
    preserves submission order, so the table is identical either way.
    """
    pts = grid_points(cfg)
    jobs = [(cfg.kind, cfg.chain, p) for p in pts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate_packed, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        chunks = [_evaluate_packed(j) for j in jobs]
    rows = [tuple(float(x) for x in row) for chunk in chunks for row in chunk]
    meta = cfg.echo()
    meta["columns"] = list(COLUMNS[cfg.kind])
    return ResultTable(COLUMNS[cfg.kind], rows, meta)


# -- output ------------------------------------------------------------------


def render_number(x) -> str:
    """12 significant digits, locale-independent."""
    return format(float(x), ".12g")


def csv_text(table: ResultTable) -> str:
    lines = [",".join(table.columns)]
    lines += [",".join(render_number(x) for x in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def write_csv(table: ResultTable, destination) -> None:
    Path(destination).write_text(csv_text(table), encoding="utf-8", newline="")


def read_csv(source) -> ResultTable:
    lines = Path(source).read_text(encoding="utf-8").splitlines()
    columns = tuple(lines[0].split(","))
    rows = [tuple(float(x) for x in line.split(",")) for line in lines[1:]]
    return ResultTable(columns, rows)


def write_metadata(table: ResultTable, destination) -> None:
    Path(destination).write_text(
        json.dumps(table.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


LOG_Y = {
    ScenarioKind.SEPARATION_SCAN,
    ScenarioKind.CLASSICAL_CORRELATIONS,
    ScenarioKind.Q_SPECTRUM_SCAN,
}


def _col(table: ResultTable, name: str) -> int:
    return table.columns.index(name) + 1


def _curves(table, path, x, y, by, label, style="linespoints", where=None):
    """One plot clause per distinct value of column ``by``."""
    xi, yi, bi = _col(table, x), _col(table, y), _col(table, by)
    keys = sorted(set(render_number(v) for v in table.column(by))) if table.rows else []
    keys.sort(key=float)
    clauses = []
    for k in keys:
        cond = f"${bi}=={k}" + (f" && {where}" if where else "")
        clauses.append(
            f"'{path}' using {xi}:(({cond}) ? ${yi} : 1/0) with {style} title '{label}={k}'"
        )
    return "plot " + ", \\\n     ".join(clauses) if clauses else f"plot '{path}' using {xi}:{yi}"


def plot_script(table: ResultTable, csv_path: str) -> str:
    kind = table.kind
    if kind is None or kind not in COLUMNS:
        raise ValidationError(f"cannot plot table of unknown scenario kind {table.metadata.get('kind')!r}")
    K = ScenarioKind
    head = [
        f"# gnuplot script for {kind.value}",
        "set datafile separator ','",
        "set datafile missing 'nan'",
        "set key autotitle columnhead",
    ]
    if kind in LOG_Y:
        head.append("set logscale y")
    p = csv_path
    if kind in (K.BISECTION_GRID, K.TERMINATED_GRID):
        body = [
            "set xlabel 'n1'", "set ylabel 'n2'", "set zlabel 'N'",
            "set dgrid3d 30,30", "set hidden3d",
            f"splot '{p}' using {_col(table, 'n1')}:{_col(table, 'n2')}:{_col(table, 'N')} with lines title 'N'",
        ]
    elif kind is K.CONVERGENCE_RATIO:
        body = ["set xlabel 'n1'", "set ylabel 'N(n1,n2)/N(inf,inf)'",
                _curves(table, p, "n1", "ratio", "alpha", "alpha")]
    elif kind is K.ENERGY_VS_NEGATIVITY:
        body = [
            "set xlabel 'negativity'", "set ylabel 'energy per oscillator per negativity'",
            "set logscale x",
            f"plot '{p}' using {_col(table, 'negativity')}:{_col(table, 'energy_per_negativity')} "
            "with linespoints title 'n', 2/pi with lines dashtype 2 title '2/pi'",
        ]
    elif kind is K.EVEN_ODD_SCALING:
        body = ["set xlabel 'n'", "set ylabel 'N'", _curves(table, p, "n", "N_closed", "alpha", "alpha")]
    elif kind is K.SEPARATION_SCAN:
        body = ["set xlabel 'separation'", "set ylabel 'N'",
                _curves(table, p, "separation", "N", "size", "s", where=f"${_col(table, 'N')}>0")]
    elif kind is K.CLASSICAL_CORRELATIONS:
        body = ["set xlabel 'j'", "set ylabel '<X_1 X_j>'",
                f"plot '{p}' using {_col(table, 'j')}:{_col(table, 'correlation')} with linespoints title 'correlation'"]
    elif kind is K.THERMAL_SCAN:
        body = ["set xlabel 'T'", "set ylabel 'N'", _curves(table, p, "T", "N", "n", "n")]
    else:  # Q_SPECTRUM_SCAN
        body = [
            "set logscale x", "set xlabel 'alpha'", "set ylabel 'q - 1'",
            _curves(table, p, "alpha", "q_minus_one", "rank", "rank", style="lines",
                    where=f"${_col(table, 'q_minus_one')}>0"),
        ]
    return "\n".join(head + body) + "\n"


def emit_plot_script(table: ResultTable, destination, csv_path) -> None:
    Path(destination).write_text(plot_script(table, str(csv_path)), encoding="utf-8")
