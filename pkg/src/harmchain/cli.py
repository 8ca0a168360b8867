"""Command-line front end.

    harmchain negativity --n 8 --alpha 20 --group-a 1-4 --group-b 5-8
    harmchain energy --n 4 --alpha 0
    harmchain spectrum --n 20 --alpha 5 [--q [--even-odd]]
    harmchain correlations --n 40 --alpha 20
    harmchain scenario run FILE [--out DIR] [--plot] [--workers K]

Oscillator indices are 1-based here and 0-based everywhere inside the
library.  Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .chain import ChainSpec, Topology, build_potential, classical_correlations, ground_energy
from .errors import NumericalError, ValidationError
from .experiments import (
    ScenarioConfig,
    ScenarioKind,
    emit_plot_script,
    render_number,
    run_scenario,
    write_csv,
    write_metadata,
)
from .linalg import circulant_eigenvalues, eigh_symmetric
from .negativity import GroupSelection, chain_negativity, q_spectrum

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def parse_group(spec: str) -> list[int]:
    """``"1,3,5-9"`` -> [1, 3, 5, 6, 7, 8, 9] (1-based, inclusive ranges)."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        try:
            if "-" in part:
                lo, hi = part.split("-")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ValidationError(f"malformed group spec {spec!r} at {part!r}") from None
    if len(set(out)) != len(out):
        raise ValidationError(f"group spec {spec!r} repeats an index")
    return out


def parse_alpha(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"malformed coupling list {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"couplings must be finite: {text!r}")
    return vals


# -- JSON scenarios ----------------------------------------------------------

_COMMON = {"kind", "n", "alpha", "alpha_values", "topology", "temperature"}
_FIELDS = {
    ScenarioKind.BISECTION_GRID: {"n_range", "n1_range", "n2_range"},
    ScenarioKind.TERMINATED_GRID: {"n_range", "n1_range", "n2_range"},
    ScenarioKind.CONVERGENCE_RATIO: {"n1_range", "n2"},
    ScenarioKind.ENERGY_VS_NEGATIVITY: {"n_values"},
    ScenarioKind.EVEN_ODD_SCALING: {"n_range", "n_step", "general_max_n"},
    ScenarioKind.SEPARATION_SCAN: {"size_range", "separation_range"},
    ScenarioKind.CLASSICAL_CORRELATIONS: set(),
    ScenarioKind.THERMAL_SCAN: {"n_values", "temperature_range"},
    ScenarioKind.Q_SPECTRUM_SCAN: set(),
}


def _num(doc, key, path, *, integer=False, minimum=None):
    v = doc[key]
    ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    if ok and integer:
        ok = float(v).is_integer()
    if ok and not math.isfinite(float(v)):
        ok = False
    if not ok:
        raise ValidationError(f"{path}: expected {'an integer' if integer else 'a number'}, got {v!r}")
    v = int(v) if integer else float(v)
    if minimum is not None and v < minimum:
        raise ValidationError(f"{path}: must be >= {minimum}, got {v}")
    return v


def _num_list(doc, key, path, *, integer=False, length=None, minimum=None):
    v = doc[key]
    if not isinstance(v, list) or not v:
        raise ValidationError(f"{path}: expected a non-empty list")
    if length is not None and len(v) != length:
        raise ValidationError(f"{path}: expected {length} entries, got {len(v)}")
    return [_num(v, i, f"{path}[{i}]", integer=integer, minimum=minimum) for i in range(len(v))]


def _int_range(doc, key, minimum=1):
    lo, hi = _num_list(doc, key, f"$.{key}", integer=True, length=2, minimum=minimum)
    if hi < lo:
        raise ValidationError(f"$.{key}: upper bound {hi} below lower bound {lo}")
    return lo, hi


def scenario_from_dict(doc: Any) -> ScenarioConfig:
    """Validate a parsed JSON scenario document; errors name the JSON path."""
    if not isinstance(doc, dict):
        raise ValidationError("$: expected a JSON object")
    if "kind" not in doc:
        raise ValidationError("$.kind: missing required field 'kind'")
    try:
        kind = ScenarioKind(doc["kind"])
    except ValueError:
        choices = ", ".join(k.value for k in ScenarioKind)
        raise ValidationError(f"$.kind: unknown kind {doc['kind']!r} (one of {choices})") from None
    allowed = _COMMON | _FIELDS[kind]
    for key in doc:
        if key not in allowed:
            raise ValidationError(f"$.{key}: unknown field for {kind.value}")

    couplings = tuple(_num_list(doc, "alpha", "$.alpha")) if "alpha" in doc else ()
    topology = doc.get("topology", "ring")
    if topology not in ("ring", "terminated"):
        raise ValidationError(f"$.topology: expected 'ring' or 'terminated', got {topology!r}")
    temperature = _num(doc, "temperature", "$.temperature", minimum=0.0) if "temperature" in doc else 0.0
    ranges: dict[str, tuple] = {}
    options: dict[str, Any] = {}
    if "alpha_values" in doc:
        ranges["alpha"] = tuple(_num_list(doc, "alpha_values", "$.alpha_values"))

    defaults_n = {
        ScenarioKind.SEPARATION_SCAN: 40,
        ScenarioKind.CLASSICAL_CORRELATIONS: 40,
    }
    n = _num(doc, "n", "$.n", integer=True, minimum=1) if "n" in doc else defaults_n.get(kind, 20)

    K = ScenarioKind
    if kind in (K.BISECTION_GRID, K.TERMINATED_GRID):
        if "n_range" in doc:
            if "n1_range" in doc or "n2_range" in doc:
                raise ValidationError("$.n_range: give either n_range or n1_range/n2_range")
            lo, hi = _int_range(doc, "n_range", minimum=2)
            ranges["pairs"] = tuple(
                (n1, n2) for n1 in range(1, hi) for n2 in range(1, hi) if lo <= n1 + n2 <= hi
            )
            n = hi
        else:
            for key, name in (("n1_range", "n1"), ("n2_range", "n2")):
                if key in doc:
                    lo, hi = _int_range(doc, key)
                    ranges[name] = tuple(range(lo, hi + 1))
            n = max(ranges.get("n1", (30,))) + max(ranges.get("n2", (30,)))
    elif kind is K.CONVERGENCE_RATIO:
        if "n1_range" in doc:
            lo, hi = _int_range(doc, "n1_range")
            ranges["n1"] = tuple(range(lo, hi + 1))
        if "n2" in doc:
            ranges["n2"] = (_num(doc, "n2", "$.n2", integer=True, minimum=1),)
    elif kind is K.ENERGY_VS_NEGATIVITY:
        if "n_values" in doc:
            ranges["n"] = tuple(_num_list(doc, "n_values", "$.n_values", integer=True, minimum=2))
        elif "n" in doc:
            ranges["n"] = (n,)
    elif kind is K.EVEN_ODD_SCALING:
        step = _num(doc, "n_step", "$.n_step", integer=True, minimum=2) if "n_step" in doc else 4
        if step % 2:
            raise ValidationError(f"$.n_step: must be even, got {step}")
        if "n_range" in doc:
            lo, hi = _int_range(doc, "n_range", minimum=2)
            if lo % 2:
                raise ValidationError(f"$.n_range[0]: even/odd split needs even n, got {lo}")
            ranges["n"] = tuple(range(lo, hi + 1, step))
        if "general_max_n" in doc:
            options["general_max_n"] = _num(doc, "general_max_n", "$.general_max_n", integer=True, minimum=0)
    elif kind is K.SEPARATION_SCAN:
        if "size_range" in doc:
            lo, hi = _int_range(doc, "size_range")
            ranges["size"] = tuple(range(lo, hi + 1))
        if "separation_range" in doc:
            lo, hi = _int_range(doc, "separation_range", minimum=0)
            ranges["separation"] = tuple(range(lo, hi + 1))
    elif kind is K.THERMAL_SCAN:
        if "n_values" in doc:
            ranges["n"] = tuple(_num_list(doc, "n_values", "$.n_values", integer=True, minimum=2))
        if "temperature_range" in doc:
            start, stop, count = _num_list(doc, "temperature_range", "$.temperature_range", length=3)
            if start < 0 or stop < start:
                raise ValidationError(f"$.temperature_range: need 0 <= start <= stop, got {start}, {stop}")
            if not float(count).is_integer() or count < 1:
                raise ValidationError(f"$.temperature_range[2]: point count must be a positive integer, got {count}")
            ranges["T"] = tuple(float(t) for t in np.linspace(start, stop, int(count)))

    try:
        chain = ChainSpec.from_temperature(n, couplings, Topology(topology), temperature)
    except ValidationError as exc:
        raise ValidationError(f"$: {exc}") from None
    return ScenarioConfig(kind, chain, ranges, options)


def load_scenario(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(doc)


# -- argument parsing --------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _chain_args(p):
    p.add_argument("--n", type=int, required=True, help="number of oscillators")
    p.add_argument("--alpha", default="", help="couplings alpha_1[,alpha_2,...]")
    p.add_argument("--topology", choices=("ring", "terminated"), default="ring")
    p.add_argument("--temperature", type=float, default=0.0, help="T (0 = ground state)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="harmchain", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("negativity", help="log-negativity between two groups")
    _chain_args(p)
    p.add_argument("--group-a", required=True)
    p.add_argument("--group-b", required=True)

    p = sub.add_parser("energy", help="ground energy Tr V^{1/2} in units of E0")
    _chain_args(p)

    p = sub.add_parser("spectrum", help="potential eigenvalues, or Q spectrum with --q")
    _chain_args(p)
    p.add_argument("--q", action="store_true", help="Q spectrum of the symmetric bisection")
    p.add_argument("--even-odd", action="store_true", help="with --q: odd/even split instead")

    p = sub.add_parser("correlations", help="<X_1 X_j> for j = 1..n")
    _chain_args(p)

    p = sub.add_parser("scenario", help="run a JSON scenario")
    ssub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = ssub.add_parser("run")
    r.add_argument("file")
    r.add_argument("--out", default=".")
    r.add_argument("--plot", action="store_true", help="also write a gnuplot script")
    r.add_argument("--workers", type=int, default=1)
    return parser


def _spec(args) -> ChainSpec:
    couplings = parse_alpha(args.alpha) if args.alpha else ()
    return ChainSpec.from_temperature(args.n, couplings, Topology(args.topology), args.temperature)


def _fmt(values) -> str:
    return " ".join(render_number(v) for v in values)


def _dispatch(args) -> list[str]:
    if args.command == "scenario":
        cfg = load_scenario(args.file)
        if args.workers < 1:
            raise ValidationError("--workers must be >= 1")
        table = run_scenario(cfg, workers=args.workers)
        out = Path(args.out)
        stem = Path(args.file).stem
        try:
            out.mkdir(parents=True, exist_ok=True)
            csv_path = out / f"{stem}.csv"
            write_csv(table, csv_path)
            write_metadata(table, out / f"{stem}.meta.json")
            written = [str(csv_path)]
            if args.plot:
                gp = out / f"{stem}.gp"
                emit_plot_script(table, gp, csv_path.name)
                written.append(str(gp))
        except OSError as exc:
            raise ValidationError(f"cannot write to {out}: {exc.strerror}") from None
        bad = sum(1 for s in table.column("status") if s != 0)
        return [f"rows: {len(table)} (flagged: {bad})"] + [f"wrote {w}" for w in written]

    spec = _spec(args)
    if args.command == "negativity":
        sel = GroupSelection.from_one_based(parse_group(args.group_a), parse_group(args.group_b))
        sel.check(spec.n)
        res = chain_negativity(spec, sel)
        return [f"log_negativity: {render_number(res.log_negativity)}",
                f"spectrum: {_fmt(res.symplectic_spectrum)}"]
    v = build_potential(spec)
    if args.command == "energy":
        return [render_number(ground_energy(v))]
    if args.command == "spectrum":
        if args.q:
            return [_fmt(q_spectrum(v, half_split=not args.even_odd))]
        if spec.topology is Topology.RING:
            return [_fmt(circulant_eigenvalues(spec.first_row))]
        return [_fmt(eigh_symmetric(v).eigenvalues)]
    if args.command == "correlations":
        return [_fmt(classical_correlations(v))]
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        lines = _dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("\n".join(lines))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
