"""Run engines shared by the command-line interface.

Each sweep builds its voltage- or alpha-independent objects once, then maps
a module-level worker over the sweep points.  Workers are pure functions of
their argument tuple, so results are identical whether the map runs serially
or on a process pool; pool results come back in submission order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .dynamics import (assemble_generator, evolve, husimi_q, initial_state,
                       steady_state)
from .errors import ConfigError
from .junction import PatIntegrator, charge_distribution
from .params import SystemParams
from .rates import (eta_table, match_sets, qcr_bitflip_rate, rate_table,
                    transition_rate)
from .spectrum import diagonalize_kpo

# Population rates |j> -> |i> reported by default: the two cooling channels,
# the two heating channels, and the two phase-flip directions.
DEFAULT_TRANSITIONS = (
    (1, 1, 2, 2), (0, 0, 3, 3),
    (2, 2, 1, 1), (3, 3, 0, 0),
    (0, 0, 1, 1), (1, 1, 0, 0),
)

_LABEL_RE = re.compile(r"^g1(_\d+){4}$")


def transition_label(key: tuple[int, int, int, int]) -> str:
    return "g1_" + "_".join(str(k) for k in key)


def parse_transition_label(text: str) -> tuple[int, int, int, int]:
    text = text.strip()
    if not _LABEL_RE.match(text):
        raise ConfigError(
            f"bad transition label {text!r}; expected g1_<mu>_<mup>_<nu>_<nup>")
    parts = text.split("_")[1:]
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


@dataclass
class SweepResult:
    axis: str
    values: np.ndarray
    columns: list[str]
    data: np.ndarray                    # (n_points, n_columns)
    meta: dict = field(default_factory=dict)

    def rows(self):
        for value, row in zip(self.values, self.data):
            yield (float(value), *map(float, row))


def _pool_map(worker, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    ctx = get_context("fork")
    with ctx.Pool(processes=min(int(threads), len(jobs))) as pool:
        return pool.map(worker, jobs, chunksize=1)


def _check_transitions(transitions, n_keep: int):
    for key in transitions:
        if len(key) != 4 or any(k < 0 or k >= n_keep for k in key):
            raise ConfigError(
                f"transition {key} outside the retained space of {n_keep} states")


# ---------------------------------------------------------------------------
# Transition-rate sweeps


def _rates_point(params, spectrum, eta, transitions, interference):
    integrator = PatIntegrator.from_params(params)
    pq = charge_distribution(params, integrator)
    diagonal = all(i == ii and j == jj for (i, ii, j, jj) in transitions)
    if diagonal and interference == "on":
        return [transition_rate(params, spectrum, eta, pq, integrator, i, j)
                for (i, ii, j, jj) in transitions]
    table = rate_table(params, spectrum, eta=eta, pq=pq,
                       interference=interference, integrator=integrator)
    return [complex(table.gamma1.get(tuple(key), 0j)).real
            for key in transitions]


def _rates_voltage_worker(job):
    params, spectrum, eta, bias, transitions, interference = job
    return _rates_point(params.replace(bias_v=float(bias)), spectrum, eta,
                        transitions, interference)


def _rates_alpha_worker(job):
    params, alpha, transitions, interference = job
    p = params.with_alpha(float(alpha))
    spectrum = diagonalize_kpo(p)
    eta = eta_table(spectrum, p.rho_c, p.dm_max)
    return _rates_point(p, spectrum, eta, transitions, interference)


def rates_sweep(
    params: SystemParams,
    axis: str,
    values,
    transitions=DEFAULT_TRANSITIONS,
    interference: str = "on",
    threads: int = 1,
) -> SweepResult:
    values = np.asarray(values, float)
    transitions = tuple(tuple(t) for t in transitions)
    _check_transitions(transitions, params.n_keep)
    if axis == "voltage":
        spectrum = diagonalize_kpo(params)
        eta = eta_table(spectrum, params.rho_c, params.dm_max)
        jobs = [(params, spectrum, eta, v, transitions, interference)
                for v in values]
        rows = _pool_map(_rates_voltage_worker, jobs, threads)
    elif axis == "alpha":
        if np.any(values <= 0.0):
            raise ConfigError("alpha sweep values must be positive")
        jobs = [(params, a, transitions, interference) for a in values]
        rows = _pool_map(_rates_alpha_worker, jobs, threads)
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; use voltage or alpha")
    return SweepResult(
        axis=axis,
        values=values,
        columns=[transition_label(t) for t in transitions],
        data=np.array(rows, float),
        meta={"interference": interference},
    )


# ---------------------------------------------------------------------------
# Steady states along the bias axis


def _steady_worker(job):
    params, spectrum, eta, bias = job
    p = params.replace(bias_v=float(bias))
    table = rate_table(p, spectrum, eta=eta)
    gen = assemble_generator(spectrum, p, table)
    rho, residual = steady_state(gen)
    pops = np.real(np.diag(rho))
    return [pops[0], pops[1], pops[0] + pops[1], residual]


def steady_sweep(params: SystemParams, voltages, threads: int = 1) -> SweepResult:
    voltages = np.asarray(voltages, float)
    spectrum = diagonalize_kpo(params)
    eta = eta_table(spectrum, params.rho_c, params.dm_max)
    jobs = [(params, spectrum, eta, v) for v in voltages]
    rows = _pool_map(_steady_worker, jobs, threads)
    return SweepResult(
        axis="voltage",
        values=voltages,
        columns=["pop_phi0", "pop_phi1", "pop_qubit", "residual"],
        data=np.array(rows, float),
    )


# ---------------------------------------------------------------------------
# Branch-flip rates along the alpha axis


def _bitflip_worker(job):
    params, alpha = job
    p = params.with_alpha(float(alpha))
    spectrum = diagonalize_kpo(p)
    eta = eta_table(spectrum, p.rho_c, p.dm_max)
    integrator = PatIntegrator.from_params(p)
    pq = charge_distribution(p, integrator)
    matches = match_sets(spectrum, p.omega_rf, p.match_tol)
    common = dict(eta=eta, pq=pq, integrator=integrator, matches=matches)
    rate_on = qcr_bitflip_rate(rate_table(p, spectrum, interference="on", **common))
    rate_off = qcr_bitflip_rate(rate_table(p, spectrum, interference="off", **common))
    ratio = rate_on / rate_off if rate_off != 0.0 else np.inf
    return [rate_on, rate_off, ratio]


def bitflip_sweep(params: SystemParams, alphas, threads: int = 1) -> SweepResult:
    alphas = np.asarray(alphas, float)
    if np.any(alphas <= 0.0):
        raise ConfigError("alpha sweep values must be positive")
    jobs = [(params, a) for a in alphas]
    rows = _pool_map(_bitflip_worker, jobs, threads)
    return SweepResult(
        axis="alpha",
        values=alphas,
        columns=["rate_interference", "rate_no_interference", "ratio"],
        data=np.array(rows, float),
    )


# ---------------------------------------------------------------------------
# Time evolution


def _clean_fields(raw: dict, str_keys: tuple, int_keys: tuple,
                  float_keys: tuple, where: str) -> dict:
    allowed = set(str_keys) | set(int_keys) | set(float_keys)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    clean: dict = {}
    for key, value in raw.items():
        if key in str_keys:
            if not isinstance(value, str):
                raise ConfigError(f"{where} key {key!r} must be a string")
            clean[key] = value
        elif key in int_keys:
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or value != int(value):
                raise ConfigError(f"{where} key {key!r} must be an integer")
            clean[key] = int(value)
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{where} key {key!r} must be a number")
            clean[key] = float(value)
    return clean


@dataclass
class Schedule:
    initial: str = "phi0"
    t_end: float = 1e-4
    points: int = 201
    t_qcr_on: float = 0.0

    @classmethod
    def from_dict(cls, raw: dict) -> "Schedule":
        sched = cls(**_clean_fields(raw, ("initial",), ("points",),
                                    ("t_end", "t_qcr_on"), "schedule"))
        if sched.t_end <= 0.0:
            raise ConfigError("schedule t_end must be positive")
        if sched.points < 2:
            raise ConfigError("schedule points must be at least 2")
        return sched


@dataclass
class DynamicsResult:
    times: np.ndarray
    populations: np.ndarray        # (nt, n_keep)
    branch_plus: np.ndarray
    qubit: np.ndarray
    qcr_active: np.ndarray         # 0/1 per time
    trace_drift: float
    herm_drift: float
    min_eigenvalue: float

    def rows(self):
        for k, t in enumerate(self.times):
            yield (float(t), *map(float, self.populations[k]),
                   float(self.qubit[k]), float(self.branch_plus[k]),
                   float(self.qcr_active[k]))


def dynamics_run(params: SystemParams, schedule: Schedule) -> DynamicsResult:
    spectrum = diagonalize_kpo(params)
    eta = eta_table(spectrum, params.rho_c, params.dm_max)
    table = rate_table(params, spectrum, eta=eta)
    gen_on = assemble_generator(spectrum, params, table)
    gen_off = assemble_generator(spectrum, params, None)
    rho0 = initial_state(spectrum, schedule.initial)
    t_grid = np.linspace(0.0, schedule.t_end, schedule.points)
    traj = evolve(rho0, (gen_off, gen_on),
                  {"t_qcr_on": schedule.t_qcr_on}, t_grid)
    active = (t_grid >= schedule.t_qcr_on).astype(float)
    return DynamicsResult(
        times=traj.times,
        populations=traj.populations(),
        branch_plus=traj.branch_population(+1.0),
        qubit=traj.qubit_population(),
        qcr_active=active,
        trace_drift=traj.trace_drift,
        herm_drift=traj.herm_drift,
        min_eigenvalue=traj.min_eigenvalue,
    )


# ---------------------------------------------------------------------------
# Husimi maps


@dataclass
class HusimiConfig:
    source: str = "steady"         # steady | evolve
    time: float = 0.0
    initial: str = "phi_alpha"
    qcr: str = "on"
    re_min: float = -4.0
    re_max: float = 4.0
    im_min: float = -4.0
    im_max: float = 4.0
    points: int = 81

    @classmethod
    def from_dict(cls, raw: dict) -> "HusimiConfig":
        cfg = cls(**_clean_fields(
            raw, ("source", "initial", "qcr"), ("points",),
            ("time", "re_min", "re_max", "im_min", "im_max"), "husimi"))
        if cfg.source not in ("steady", "evolve"):
            raise ConfigError("husimi source must be 'steady' or 'evolve'")
        if cfg.qcr not in ("on", "off"):
            raise ConfigError("husimi qcr must be 'on' or 'off'")
        if cfg.points < 2:
            raise ConfigError("husimi points must be at least 2")
        if not (cfg.re_max > cfg.re_min and cfg.im_max > cfg.im_min):
            raise ConfigError("husimi window must have positive extent")
        if cfg.source == "evolve" and cfg.time < 0.0:
            raise ConfigError("husimi time must be non-negative")
        return cfg


@dataclass
class HusimiResult:
    re_axis: np.ndarray
    im_axis: np.ndarray
    q: np.ndarray                  # (n_im, n_re)
    norm: float
    meta: dict

    def rows(self):
        for iy, im in enumerate(self.im_axis):
            for ix, re_ in enumerate(self.re_axis):
                yield (float(re_), float(im), float(self.q[iy, ix]))


def husimi_run(params: SystemParams, cfg: HusimiConfig) -> HusimiResult:
    spectrum = diagonalize_kpo(params)
    meta: dict = {"source": cfg.source}
    if cfg.source == "steady":
        table = rate_table(params, spectrum)
        gen = assemble_generator(spectrum, params, table)
        rho, residual = steady_state(gen)
        meta["residual"] = residual
    else:
        table = rate_table(params, spectrum) if cfg.qcr == "on" else None
        gen = assemble_generator(spectrum, params, table)
        rho0 = initial_state(spectrum, cfg.initial)
        if cfg.time == 0.0:
            rho = rho0
        else:
            traj = evolve(rho0, gen, None, np.array([0.0, cfg.time]))
            rho = traj.states[-1]
        meta.update({"time": cfg.time, "initial": cfg.initial, "qcr": cfg.qcr})
    re_axis = np.linspace(cfg.re_min, cfg.re_max, cfg.points)
    im_axis = np.linspace(cfg.im_min, cfg.im_max, cfg.points)
    q = husimi_q(rho, spectrum, re_axis, im_axis)
    cell = (re_axis[1] - re_axis[0]) * (im_axis[1] - im_axis[0])
    return HusimiResult(re_axis=re_axis, im_axis=im_axis, q=q,
                        norm=float(np.sum(q) * cell), meta=meta)


# ---------------------------------------------------------------------------
# Island charge distribution


def pq_run(params: SystemParams, pumped: bool = False) -> SweepResult:
    pq = charge_distribution(params, pumped=pumped)
    qs = np.array(pq.q_values, float)
    probs = np.array([pq.p(int(q)) for q in pq.q_values], float)
    return SweepResult(axis="q", values=qs, columns=["p"],
                       data=probs[:, None],
                       meta={"pumped": "yes" if pumped else "no"})
