"""Command-line front end: ``merid <rates|coherence|diagram|interfere|optomech>``.

Lengths on the command line are in nm, pressures in Torr, temperatures in K
and times in s. ``--config`` takes a JSON parameter set in SI units, either a
bare mapping of :class:`DefaultParameterSet` fields or a run manifest written
by an earlier invocation. ``--set key=value`` overrides single fields (SI).

Every command writes its CSV/JSON outputs and a ``<command>_manifest.json``
listing them with SHA-256 checksums into ``--out``.

Exit codes: 0 success, 2 usage error, 3 failed precondition (the condition id
is printed on stderr), 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .collapse import MODEL_GRAMMAR, CollapseModelId, model_for
from .constants import DEFAULTS, DefaultParameterSet, torr_to_pascal
from .environment import air_model, blackbody_model
from .gaussian import (
    coherence_length,
    coherence_length_schrodinger,
    evolve_with_decoherence,
    t_max_coherence,
    thermal_initial_state,
    xi_max,
)
from .interference import NoFringes, extract_visibility, fourier_contrast, grid_for_double_slit, simulate_pattern
from .localization import CompositeModel, QuadratureError
from .optomech import cavity_from_params, chi_upper_bound, optomech_bounds, t1_bound
from .protocol import (
    FeasibilityDiagram,
    check_conditions,
    fringe_spacing,
    make_plan,
    select_times,
    standard_models,
    sweep_diagram,
)

EXIT_USAGE = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4

STANDARD_SOURCES = ("air", "blackbody")
GREEN_MIN_RATIO = math.sqrt(2.0)


class UsageError(Exception):
    pass


class PreconditionFailed(Exception):
    def __init__(self, condition_id: str, message: str):
        super().__init__(message)
        self.condition_id = condition_id


# --------------------------------------------------------------------------- output helpers


def fmt(value: Any) -> str:
    """CSV cell: floats with 17 significant digits, None as an empty field."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]], header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {o!r}")


def json_text(data: Any) -> str:
    return json.dumps(_finite(data), indent=2, sort_keys=True, default=_json_default) + "\n"


def _finite(data):
    # JSON has no inf/nan; unbounded values are written as null.
    if isinstance(data, float) and not math.isfinite(data):
        return None
    if isinstance(data, dict):
        return {k: _finite(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_finite(v) for v in data]
    return data


@dataclass
class RunManifest:
    command: str
    parameters: dict[str, Any]
    options: dict[str, Any]
    version: str
    timestamp: str
    outputs: list[dict[str, str]] = field(default_factory=list)

    def add(self, path: Path, text: str):
        self.outputs.append({"path": path.name, "sha256": hashlib.sha256(text.encode()).hexdigest()})

    def to_json(self) -> str:
        return json_text(asdict(self))


class Writer:
    def __init__(self, out_dir: Path, manifest: RunManifest):
        self.out_dir = out_dir
        self.manifest = manifest
        out_dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.write_text(text)
        self.manifest.add(path, text)
        return path

    def close(self) -> Path:
        path = self.out_dir / f"{self.manifest.command}_manifest.json"
        path.write_text(self.manifest.to_json())
        return path


# --------------------------------------------------------------------------- configuration


def _parse_set(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def resolve_parameters(config: str | None, overrides: Sequence[str]) -> DefaultParameterSet:
    """Defaults, then the config file, then ``--set`` overrides."""
    params = DEFAULTS
    try:
        if config:
            data = json.loads(Path(config).read_text())
            if isinstance(data, dict) and "parameters" in data and "command" in data:
                data = data["parameters"]
            params = DefaultParameterSet.from_dict(data, base=params)
        if overrides:
            params = DefaultParameterSet.from_dict(_parse_set(overrides), base=params)
    except OSError as e:
        raise UsageError(f"cannot read config: {e}") from None
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"bad parameter: {e}") from None
    return params


def parse_models(text: str | None, default: Sequence[str]) -> list[str]:
    """Comma-separated source list; collapse entries are validated against the grammar."""
    if text is None:
        return list(default)
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    if names == ["none"]:
        return []
    for n in names:
        if n in STANDARD_SOURCES or n == "standard":
            continue
        try:
            CollapseModelId.parse(n)
        except ValueError:
            raise UsageError(f"unknown model {n!r}; expected air | blackbody | {MODEL_GRAMMAR}") from None
    return names


def _positive(name: str, value: float) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise UsageError(f"{name} must be positive, got {value!r}")
    return value


def _nm(x: float) -> float:
    return x * 1e-9


# --------------------------------------------------------------------------- commands


def cmd_rates(args, params: DefaultParameterSet, w: Writer) -> dict:
    names = parse_models(args.models, ("air", "blackbody", "csl", "qg", "dp", "k"))
    sphere = params.sphere(_nm(args.diameter_nm) / 2.0, T_internal=args.tint_k)
    env = params.environment(torr_to_pascal(args.pressure_torr))
    rows = []
    for n in names:
        if n == "air":
            m = air_model(env, sphere)
        elif n == "blackbody":
            m = blackbody_model(sphere, env)
        elif n == "standard":
            raise UsageError("'standard' is not a single source; list air,blackbody")
        else:
            m = model_for(n, sphere)
        rows.append((m.source_label or n, m.kind, m.gamma if m.is_saturating else None,
                     m.a if m.is_saturating else None, m.Lambda))
    cols = ("source", "kind", "gamma_per_s", "a_m", "Lambda_per_m2_s")
    w.write("rates.csv", csv_text(cols, rows))
    summary = {"diameter_m": sphere.diameter, "rows": [dict(zip(cols, r)) for r in rows]}
    w.write("rates.json", json_text(summary))
    return summary


def _short_lambda(models: CompositeModel, ref: float) -> float:
    return sum(c.Lambda for c in models.components if not (c.is_saturating and c.saturation_distance <= ref))


def cmd_coherence(args, params: DefaultParameterSet, w: Writer) -> dict:
    names = parse_models(args.models, ("blackbody",))
    sphere = params.sphere(_nm(args.diameter_nm) / 2.0, T_internal=args.tint_k)
    env = params.environment(torr_to_pascal(args.pressure_torr))
    trap = params.trap()
    models = _build_stack(names, sphere, env)
    lam = _short_lambda(models, 1e-9)
    tm = t_max_coherence(sphere.mass, trap.nbar, trap.omega, lam)
    xm = xi_max(sphere.mass, trap.nbar, trap.omega, lam)
    t_lo = args.t_min if args.t_min is not None else (tm * 1e-3 if tm else 1e-6)
    t_hi = args.t_max if args.t_max is not None else (tm * 1e2 if tm else 1.0)
    _positive("--t-min", t_lo)
    if not t_hi > t_lo:
        raise UsageError("--t-max must exceed --t-min")
    ts = np.geomspace(t_lo, t_hi, args.points)
    s0 = thermal_initial_state(sphere.mass, trap.omega, trap.nbar)
    rows = []
    for t in ts:
        s = evolve_with_decoherence(s0, float(t), lam)
        s_free = evolve_with_decoherence(s0, float(t), 0.0)
        rows.append((float(t), coherence_length(s), coherence_length_schrodinger(s_free.xx, trap.nbar)))
    w.write("coherence.csv", csv_text(("t_s", "xi_m", "xi_s_m"), rows))
    summary = {"Lambda_per_m2_s": lam, "t_max_s": tm, "xi_max_m": xm, "unbounded": tm is None,
               "sources": [c.source_label for c in models.components]}
    w.write("coherence.json", json_text(summary))
    return summary


def _build_stack(names: Sequence[str], sphere, env) -> CompositeModel:
    comps = []
    for n in names:
        if n == "standard":
            comps.extend(standard_models(sphere, env).components)
        elif n == "air":
            comps.append(air_model(env, sphere))
        elif n == "blackbody":
            comps.append(blackbody_model(sphere, env))
        else:
            comps.append(model_for(n, sphere))
    return CompositeModel(comps)


def cmd_diagram(args, params: DefaultParameterSet, w: Writer) -> dict:
    names = parse_models(args.models, ())
    collapse = [n for n in names if n not in STANDARD_SOURCES and n != "standard"]
    if len(collapse) > 1:
        raise UsageError("diagram takes at most one collapse model")
    lo, hi = _nm(args.d_min_nm), _nm(args.d_max_nm)
    if not (0 < lo < hi):
        raise UsageError("empty diameter range: need 0 < --d-min-nm < --d-max-nm")
    if args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    _positive("--chi", args.chi)
    env = params.environment(torr_to_pascal(args.pressure_torr))
    diag = sweep_diagram((lo, hi), resolution=args.resolution, env=env, trap=params.trap(), chi=args.chi,
                         delta_x=params.delta_x, collapse=collapse[0] if collapse else None,
                         T_internal=args.tint_k, params=params)
    write_diagram_csv(diag, w)
    ext = diag.green_extent(GREEN_MIN_RATIO)
    raw = diag.green_extent(1.0)
    summary = {"collapse": diag.collapse_label, "samples": len(diag.rows),
               "green_extent_m": ext.as_tuple(), "green_extent_raw_m": raw.as_tuple(),
               "green_min_ratio": GREEN_MIN_RATIO}
    w.write("diagram.json", json_text(summary))
    if ext:
        print(f"green region D in [{ext.lo * 1e9:.4g}, {ext.hi * 1e9:.4g}] nm")
    else:
        print("green region empty")
    return summary


def write_diagram_csv(diag: FeasibilityDiagram, w: Writer) -> Path:
    cols = FeasibilityDiagram.CSV_COLUMNS
    recs = diag.records()
    return w.write("diagram.csv", csv_text(cols, ([r[c] for c in cols] for r in recs)))


def cmd_interfere(args, params: DefaultParameterSet, w: Writer) -> dict:
    names = parse_models(args.models, ("csl", "qg"))
    sphere = params.sphere(_nm(args.diameter_nm) / 2.0, T_internal=args.tint_k)
    env = params.environment(torr_to_pascal(args.pressure_torr))
    trap = params.trap()
    chi = _positive("--chi", args.chi)
    d = _positive("--d-nm", _nm(args.d_nm))
    std = standard_models(sphere, env)
    if args.t2 is not None:
        times = select_times(sphere, trap, env, chi, std, t2_cap=_positive("--t2", args.t2))
    else:
        times = select_times(sphere, trap, env, chi, std)
    plan = make_plan(sphere, trap, times.t1, times.t2, d, chi, params.delta_x)
    report = check_conditions(plan, sphere, trap, std)
    for cid in ("i", "ii"):
        if not report[cid].passed:
            c = report[cid]
            raise PreconditionFailed(cid, f"{c.description} fails: value {c.value:.6g}, bound {c.bound:.6g}")

    stacks: dict[str, CompositeModel] = {"none": CompositeModel(), "standard": std}
    for n in names:
        if n in STANDARD_SOURCES or n == "standard":
            continue
        stacks[f"standard+{n}"] = std + CompositeModel([model_for(n, sphere)])
    grid = grid_for_double_slit(plan.sigma, plan.d, plan.chi)
    x_f = fringe_spacing(sphere.mass, d, plan.t2)
    ref = simulate_pattern(plan, sphere.mass, None, grid)
    results = {}
    for label, models in stacks.items():
        P = ref if not len(models) else simulate_pattern(plan, sphere.mass, models, grid)
        header = [f"stack={label}", f"D_m={fmt(sphere.diameter)}", f"d_m={fmt(d)}", f"t1_s={fmt(plan.t1)}",
                  f"t2_s={fmt(plan.t2)}", f"chi={fmt(chi)}", f"sigma_m={fmt(plan.sigma)}", f"x_f_m={fmt(x_f)}"]
        w.write(f"pattern_{label.replace('+', '_')}.csv",
                csv_text(("x_m", "P_per_m"), zip(P.axis.tolist(), P.P.tolist()), header))
        vis = extract_visibility(P, x_f, reference=ref)
        theta = float(models.theta(d)) if len(models) else 0.0
        results[label] = {"visibility": vis, "visibility_closed_form": math.exp(-theta * plan.t2),
                          "raw_contrast": fourier_contrast(P, x_f)}
    summary = {"D_m": sphere.diameter, "d_m": d, "t1_s": plan.t1, "t2_s": plan.t2, "chi": chi,
               "sigma_m": plan.sigma, "x_f_m": x_f, "grid_points": grid.n,
               "conditions": {c.id: {"passed": c.passed, "applicable": c.applicable} for c in report.conditions},
               "stacks": results}
    w.write("interfere.json", json_text(summary))
    return summary


def cmd_optomech(args, params: DefaultParameterSet, w: Writer) -> dict:
    lo, hi = _nm(args.d_min_nm), _nm(args.d_max_nm)
    if not (0 < lo < hi):
        raise UsageError("empty diameter range: need 0 < --d-min-nm < --d-max-nm")
    cav = cavity_from_params(params)
    trap = params.trap()
    Ds = np.geomspace(lo, hi, args.points)
    rows = []
    for D in Ds:
        s = params.sphere(float(D) / 2.0, T_internal=args.tint_k)
        b = optomech_bounds(s, cav, trap)
        t1 = t1_bound(s, cav, trap)
        ch = chi_upper_bound(s, cav, trap)
        rows.append((float(D), b.g0, b.kappa, b.Gamma0_sc, t1.value, t1.adiabatic, t1.scattering,
                     ch.value, ch.adiabatic, ch.scattering, t1.branch))
    cols = ("D_m", "g0_per_s", "kappa_per_s", "Gamma0_sc_per_s", "t1_om_s", "t1_adiabatic_s",
            "t1_scattering_s", "chi_max", "chi_adiabatic", "chi_scattering", "branch")
    w.write("optomech.csv", csv_text(cols, rows))
    summary = {"points": len(rows), "cavity": asdict(cav)}
    w.write("optomech.json", json_text(summary))
    return summary


COMMANDS = {
    "rates": cmd_rates,
    "coherence": cmd_coherence,
    "diagram": cmd_diagram,
    "interfere": cmd_interfere,
    "optomech": cmd_optomech,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON parameter set (SI units) or an earlier run manifest")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter (SI units); repeatable")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--models", help=f"comma-separated sources: air, blackbody, standard, {MODEL_GRAMMAR}")
    common.add_argument("--diameter-nm", type=float, default=100.0)
    common.add_argument("--d-nm", type=float, default=30.0, help="slit separation")
    common.add_argument("--pressure-torr", type=float, default=1e-14)
    common.add_argument("--tint-k", type=float, default=4.5, help="internal sphere temperature")
    common.add_argument("--chi", type=float, default=1000.0, help="measurement strength")
    common.add_argument("--timestamp", help="fixed manifest timestamp (default: now, UTC)")

    p = argparse.ArgumentParser(prog="merid", description="MERID double-slit calculator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("rates", parents=[common], help="localization parameters per source")
    c = sub.add_parser("coherence", parents=[common], help="coherence length versus time")
    c.add_argument("--t-min", type=float)
    c.add_argument("--t-max", type=float)
    c.add_argument("--points", type=int, default=200)
    d = sub.add_parser("diagram", parents=[common], help="d-vs-D feasibility diagram")
    d.add_argument("--d-min-nm", type=float, default=10.0, help="smallest sphere diameter")
    d.add_argument("--d-max-nm", type=float, default=2000.0, help="largest sphere diameter")
    d.add_argument("--resolution", type=int, default=64, help="samples per decade")
    i = sub.add_parser("interfere", parents=[common], help="simulated interference patterns")
    i.add_argument("--t2", type=float, help="cap on the second flight time (s)")
    o = sub.add_parser("optomech", parents=[common], help="optomechanical bounds versus diameter")
    o.add_argument("--d-min-nm", type=float, default=10.0)
    o.add_argument("--d-max-nm", type=float, default=200.0)
    o.add_argument("--points", type=int, default=100)
    return p


def _check_common(args):
    _positive("--diameter-nm", args.diameter_nm)
    if not (args.pressure_torr >= 0 and math.isfinite(args.pressure_torr)):
        raise UsageError("--pressure-torr must be non-negative")
    if not (args.tint_k >= 0 and math.isfinite(args.tint_k)):
        raise UsageError("--tint-k must be non-negative")
    if getattr(args, "points", 2) < 2:
        raise UsageError("--points must be at least 2")


def _options(args) -> dict[str, Any]:
    skip = {"config", "set", "out", "timestamp", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_common(args)
        params = resolve_parameters(args.config, args.set)
        stamp = args.timestamp or os.environ.get("MERID_TIMESTAMP") or \
            datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        manifest = RunManifest(command=args.command, parameters=params.to_dict(), options=_options(args),
                               version=__version__, timestamp=stamp)
        writer = Writer(Path(args.out), manifest)
        COMMANDS[args.command](args, params, writer)
        writer.close()
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"merid: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionFailed as e:
        print(f"merid: precondition {e.condition_id} failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (QuadratureError, NoFringes, FloatingPointError, ArithmeticError) as e:
        print(f"merid: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        # invalid physical inputs surface as ValueError from the library
        print(f"merid: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
