"""Command-line interface.

Every command reads an optional flat JSON config (physical parameters plus
the section keys below), applies flag overrides, and writes CSV to stdout
or --out.  CSV rows are printed with 17 significant digits and headers echo
the full parameter set, so outputs are reproducible byte for byte; --json
switches to a JSON document with the same content.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation-suite failure.
"""
from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .errors import (CatStateError, ChargeDistributionError, ConfigError,
                     EvolveError, MatchingError, QuadratureError,
                     SpectrumError, SteadyStateError)
from .oracles import run_oracle_suite
from .params import SystemParams, load_config
from .workflows import (DEFAULT_TRANSITIONS, HusimiConfig, Schedule,
                        bitflip_sweep, dynamics_run, husimi_run,
                        parse_transition_label, pq_run, rates_sweep,
                        steady_sweep)

_SECTION_KEYS = ("sweep", "schedule", "husimi", "rates", "interference",
                 "threads", "out")
_RUN_ERRORS = (QuadratureError, SpectrumError, CatStateError, MatchingError,
               ChargeDistributionError, EvolveError, SteadyStateError)
_SWEEP_KEYS = ("axis", "from", "to", "points", "from_ghz", "to_ghz")

_SWEEP_DEFAULTS = {
    "rates": {"voltage": (0.0, 60e9, 121), "alpha": (1.0, 2.5, 61)},
    "steady": {"voltage": (30e9, 55e9, 26)},
    "bitflip": {"alpha": (1.0, 2.5, 31)},
}


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_setup(config_path: str | None) -> tuple[SystemParams, dict]:
    raw = dict(load_config(config_path)) if config_path else {}
    sections = {key: raw.pop(key) for key in _SECTION_KEYS if key in raw}
    for key in ("sweep", "schedule", "husimi", "rates"):
        if key in sections and not isinstance(sections[key], dict):
            raise ConfigError(f"config section {key!r} must be an object")
    return SystemParams.from_dict(raw), sections


def _resolve_threads(flag: int | None, sections: dict) -> int:
    if flag is not None:
        value = flag
    elif "threads" in sections:
        value = sections["threads"]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("config key 'threads' must be an integer")
    else:
        value = min(4, os.cpu_count() or 1)
    if value < 1:
        raise ConfigError("threads must be at least 1")
    return int(value)


def _resolve_out(flag: str | None, sections: dict) -> str | None:
    if flag is not None:
        return flag
    out = sections.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("config key 'out' must be a string path")
    return out


def _section_endpoint(section: dict, base: str, axis: str) -> float | None:
    plain, ghz = base in section, base + "_ghz" in section
    if plain and ghz:
        raise ConfigError(f"sweep gives both {base!r} and {base + '_ghz'!r}")
    if ghz and axis != "voltage":
        raise ConfigError(f"sweep key {base + '_ghz'!r} only applies to "
                          f"the voltage axis")
    if not plain and not ghz:
        return None
    key = base if plain else base + "_ghz"
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"sweep key {key!r} must be a number")
    return float(value) * (1e9 if ghz else 1.0)


def _resolve_sweep(command: str, sections: dict, axis_flag: str | None,
                   from_flag: float | None, to_flag: float | None,
                   points_flag: int | None) -> tuple[str, np.ndarray]:
    section = sections.get("sweep", {})
    unknown = set(section) - set(_SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    defaults = _SWEEP_DEFAULTS[command]
    axis = axis_flag or section.get("axis") or next(iter(defaults))
    if axis not in defaults:
        raise ConfigError(
            f"command {command!r} cannot sweep axis {axis!r}; "
            f"choose from {sorted(defaults)}")
    lo_d, hi_d, pts_d = defaults[axis]
    lo = from_flag if from_flag is not None \
        else _section_endpoint(section, "from", axis)
    hi = to_flag if to_flag is not None \
        else _section_endpoint(section, "to", axis)
    pts = points_flag if points_flag is not None else section.get("points")
    if pts is None:
        pts = pts_d
    if isinstance(pts, bool) or not isinstance(pts, int) or pts < 1:
        raise ConfigError("sweep points must be a positive integer")
    lo = lo_d if lo is None else lo
    hi = hi_d if hi is None else hi
    if pts > 1 and hi <= lo:
        raise ConfigError("sweep range must have to > from")
    return axis, np.linspace(lo, hi, pts)


def _resolve_interference(flag: str | None, sections: dict) -> str:
    if flag is not None:
        return flag
    value = sections.get("interference", "on")
    if value not in ("on", "off"):
        raise ConfigError("interference must be 'on' or 'off'")
    return value


def _resolve_transitions(flag: str | None, sections: dict):
    raw = None
    if flag is not None:
        raw = [part for part in flag.split(",") if part.strip()]
    else:
        section = sections.get("rates", {})
        unknown = set(section) - {"transitions"}
        if unknown:
            raise ConfigError(f"unknown rates keys: {sorted(unknown)}")
        if "transitions" in section:
            listed = section["transitions"]
            if not isinstance(listed, list) or \
                    not all(isinstance(s, str) for s in listed):
                raise ConfigError("rates.transitions must be a list of labels")
            raw = listed
    if raw is None:
        return DEFAULT_TRANSITIONS
    if not raw:
        raise ConfigError("transition list is empty")
    return tuple(parse_transition_label(s) for s in raw)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _emit(out_path: str | None, as_json: bool, params: SystemParams,
          meta: dict, columns: list[str], rows) -> None:
    rows = [list(map(float, row)) for row in rows]
    if as_json:
        payload = {
            "params": {k: v for k, v in params.echo_items()},
            "meta": meta,
            "columns": columns,
            "rows": rows,
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        echo = dict(params.echo_items())
        echo.update(meta)
        lines = [f"# {key} = {_fmt(echo[key])}" for key in sorted(echo)]
        lines.append(",".join(columns))
        lines.extend(",".join(format(x, ".17g") for x in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        with open(out_path, "w") as handle:
            handle.write(text)


def _common(fn):
    fn = click.option("--threads", type=int, default=None,
                      help="Worker processes for sweeps.")(fn)
    fn = click.option("--json", "as_json", is_flag=True,
                      help="Emit JSON instead of CSV.")(fn)
    fn = click.option("--out", "out_path", type=click.Path(dir_okay=False),
                      default=None, help="Output file (default stdout).")(fn)
    fn = click.option("--config", "config_path",
                      type=click.Path(exists=False, dir_okay=False),
                      default=None, help="Flat JSON config file.")(fn)
    return fn


def _sweep_flags(fn):
    fn = click.option("--points", type=int, default=None,
                      help="Number of sweep points.")(fn)
    fn = click.option("--to", type=float, default=None,
                      help="Sweep end (Hz for voltage sweeps).")(fn)
    fn = click.option("--from", "from_", type=float, default=None,
                      help="Sweep start (Hz for voltage sweeps).")(fn)
    return fn


def _guarded(body) -> None:
    try:
        body()
    except ConfigError as exc:
        _fail(2, str(exc))
    except _RUN_ERRORS as exc:
        _fail(3, str(exc))


@click.group()
def main() -> None:
    """Tunneling-driven transition rates and dissipative dynamics of a
    two-photon-pumped Kerr oscillator coupled to a voltage-biased
    normal-metal island."""


@main.command()
@_common
@_sweep_flags
@click.option("--sweep", "axis_flag", type=click.Choice(["voltage", "alpha"]),
              default=None, help="Sweep axis.")
@click.option("--interference", "interference_flag",
              type=click.Choice(["on", "off"]), default=None,
              help="Keep or drop the degenerate-pair interference entries.")
@click.option("--transitions", "transitions_flag", type=str, default=None,
              help="Comma-separated labels g1_<mu>_<mup>_<nu>_<nup>.")
def rates(config_path, out_path, as_json, threads, from_, to, points,
          axis_flag, interference_flag, transitions_flag) -> None:
    """Tunneling transition rates along a voltage or alpha sweep."""
    def body():
        params, sections = _load_setup(config_path)
        axis, values = _resolve_sweep("rates", sections, axis_flag,
                                      from_, to, points)
        transitions = _resolve_transitions(transitions_flag, sections)
        interference = _resolve_interference(interference_flag, sections)
        result = rates_sweep(params, axis, values, transitions=transitions,
                             interference=interference,
                             threads=_resolve_threads(threads, sections))
        meta = {"command": "rates", "axis": axis,
                "interference": interference,
                "sweep_points": values.size}
        _emit(_resolve_out(out_path, sections), as_json, params, meta,
              [axis, *result.columns], result.rows())
    _guarded(body)


@main.command()
@_common
@_sweep_flags
def steady(config_path, out_path, as_json, threads, from_, to, points) -> None:
    """Stationary state of the full master equation along a voltage sweep."""
    def body():
        params, sections = _load_setup(config_path)
        axis, values = _resolve_sweep("steady", sections, None,
                                      from_, to, points)
        result = steady_sweep(params, values,
                              threads=_resolve_threads(threads, sections))
        meta = {"command": "steady", "axis": axis,
                "sweep_points": values.size}
        _emit(_resolve_out(out_path, sections), as_json, params, meta,
              [axis, *result.columns], result.rows())
    _guarded(body)


@main.command()
@_common
@_sweep_flags
def bitflip(config_path, out_path, as_json, threads, from_, to, points) -> None:
    """Branch-flip rate with and without the interference entries, vs alpha."""
    def body():
        params, sections = _load_setup(config_path)
        axis, values = _resolve_sweep("bitflip", sections, None,
                                      from_, to, points)
        result = bitflip_sweep(params, values,
                               threads=_resolve_threads(threads, sections))
        meta = {"command": "bitflip", "axis": axis,
                "sweep_points": values.size}
        _emit(_resolve_out(out_path, sections), as_json, params, meta,
              [axis, *result.columns], result.rows())
    _guarded(body)


@main.command()
@_common
@click.option("--initial", type=str, default=None,
              help="phi0, phi1, phi_alpha or phi_minus_alpha.")
@click.option("--t-end", type=float, default=None, help="Final time, s.")
@click.option("--points", type=int, default=None, help="Output grid points.")
@click.option("--t-qcr-on", type=float, default=None,
              help="Time at which the tunneling junction is switched on, s.")
def dynamics(config_path, out_path, as_json, threads, initial, t_end,
             points, t_qcr_on) -> None:
    """Populations versus time with the junction switched on mid-run."""
    def body():
        params, sections = _load_setup(config_path)
        raw = dict(sections.get("schedule", {}))
        overrides = {"initial": initial, "t_end": t_end, "points": points,
                     "t_qcr_on": t_qcr_on}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        schedule = Schedule.from_dict(raw)
        result = dynamics_run(params, schedule)
        meta = {"command": "dynamics", "initial": schedule.initial,
                "t_end": schedule.t_end, "t_qcr_on": schedule.t_qcr_on,
                "trace_drift": result.trace_drift,
                "min_eigenvalue": result.min_eigenvalue}
        columns = ["time",
                   *(f"pop_{k}" for k in range(params.n_keep)),
                   "pop_qubit", "pop_branch_plus", "qcr_active"]
        _emit(_resolve_out(out_path, sections), as_json, params, meta,
              columns, result.rows())
    _guarded(body)


@main.command()
@_common
@click.option("--source", type=click.Choice(["steady", "evolve"]),
              default=None, help="Map the stationary state or an evolved one.")
@click.option("--time", "time_", type=float, default=None,
              help="Evolution time before mapping, s (source=evolve).")
@click.option("--initial", type=str, default=None,
              help="Initial state for source=evolve.")
@click.option("--qcr", type=click.Choice(["on", "off"]), default=None,
              help="Junction state during source=evolve.")
@click.option("--points", type=int, default=None,
              help="Grid points per phase-space axis.")
@click.option("--extent", type=float, default=None,
              help="Symmetric window half-width in both quadratures.")
def husimi(config_path, out_path, as_json, threads, source, time_, initial,
           qcr, points, extent) -> None:
    """Husimi Q map of the stationary or evolved state."""
    def body():
        params, sections = _load_setup(config_path)
        raw = dict(sections.get("husimi", {}))
        overrides = {"source": source, "time": time_, "initial": initial,
                     "qcr": qcr, "points": points}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        if extent is not None:
            if extent <= 0.0:
                raise ConfigError("extent must be positive")
            raw.update({"re_min": -extent, "re_max": extent,
                        "im_min": -extent, "im_max": extent})
        cfg = HusimiConfig.from_dict(raw)
        result = husimi_run(params, cfg)
        meta = {"command": "husimi", "norm": result.norm}
        meta.update({f"husimi_{k}": v for k, v in result.meta.items()})
        _emit(_resolve_out(out_path, sections), as_json, params, meta,
              ["re", "im", "q"], result.rows())
    _guarded(body)


@main.command()
@click.option("--pumped", is_flag=True,
              help="Evaluate the elastic rates at the operating bias instead "
                   "of in equilibrium (sensitivity check).")
@_common
def pq(config_path, out_path, as_json, threads, pumped) -> None:
    """Stationary island charge-state distribution."""
    def body():
        params, sections = _load_setup(config_path)
        result = pq_run(params, pumped=pumped)
        meta = {"command": "pq", **result.meta}
        _emit(_resolve_out(out_path, sections), as_json, params, meta,
              ["q", *result.columns], result.rows())
    _guarded(body)


@main.command()
@click.option("--config", "config_path",
              type=click.Path(exists=False, dir_okay=False), default=None,
              help="Flat JSON config file.")
@click.option("--json", "as_json", is_flag=True,
              help="Emit the report as JSON.")
def validate(config_path, as_json) -> None:
    """Run the closed-form and cross-check suite; exit 4 on any failure."""
    def body():
        params, _sections = _load_setup(config_path)
        reports = run_oracle_suite(params)
        if as_json:
            payload = [report.__dict__ for report in reports]
            click.echo(json.dumps(payload, sort_keys=True, indent=2))
        else:
            for report in reports:
                click.echo(report.line())
            failed = sum(not r.passed for r in reports)
            click.echo(f"{len(reports) - failed}/{len(reports)} checks passed")
        if any(not r.passed for r in reports):
            sys.exit(4)
    _guarded(body)


if __name__ == "__main__":
    main()
