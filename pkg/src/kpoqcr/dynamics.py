"""Density-matrix propagation in the retained eigenbasis.

The state is vectorized row-major: vec(rho)[mu * n + mup] = rho[mu, mup].
Three generator pieces act on it:

  coherent  : -i 2 pi (E_mu - E_mup) rho[mu,mup]   (zero inside snapped groups)
  lindblad  : single-photon loss (kappa) and pure dephasing (gamma_p),
              both angular rates 2 pi times the configured Hz values
  tunneling : the matched gamma1/gamma2/gamma3 tensors of a RateTable

Propagation uses the classical fourth-order Runge-Kutta update, which for a
linear autonomous generator is exactly the one-step matrix
I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24; steps between output points are
applied via integer matrix powers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .constants import TWO_PI
from .errors import EvolveError, SteadyStateError
from .params import SystemParams
from .rates import RateTable
from .spectrum import Spectrum, build_fock_operators, coherent_state

_STEP_SAFETY = 0.1      # h <= safety / ||L||_inf
_MAX_HALVINGS = 10
_TRACE_TOL = 1e-9       # allowed trace drift per unit normalized time


def dissipator_superop(op: np.ndarray) -> np.ndarray:
    """Superoperator of D[O] rho = 2 O rho O^dag - O^dag O rho - rho O^dag O."""
    n = op.shape[0]
    eye = np.eye(n)
    oho = op.conj().T @ op
    return (2.0 * np.kron(op, op.conj())
            - np.kron(oho, eye)
            - np.kron(eye, oho.T))


def lindblad_dissipators(spectrum: Spectrum, kappa: float, gamma_p: float) -> np.ndarray:
    """Intrinsic loss and dephasing superoperator; rates are Hz /2pi values."""
    ops = build_fock_operators(spectrum.n_fock)
    a_proj = spectrum.project(ops.a)
    n_proj = spectrum.project(ops.num)
    return (0.5 * TWO_PI * kappa * dissipator_superop(a_proj)
            + TWO_PI * gamma_p * dissipator_superop(n_proj))


def coherent_superop(energies: np.ndarray) -> np.ndarray:
    omega = TWO_PI * np.subtract.outer(energies, energies)
    return np.diag((-1j * omega).ravel())


def qcr_superop(table: RateTable) -> np.ndarray:
    n = table.n
    sup = np.zeros((n * n, n * n), dtype=complex)
    for (mu, mup, nu, nup), val in table.gamma1.items():
        sup[mu * n + mup, nu * n + nup] += val
    for (mu, xi), val in table.core2.items():
        for mup in range(n):
            sup[mu * n + mup, xi * n + mup] += val
    for (mup, xi), val in table.core2.items():
        cval = complex(val).conjugate()
        for mu in range(n):
            sup[mu * n + mup, mu * n + xi] += cval
    return sup


@dataclass
class Generator:
    """Master-equation generator split into its physical parts."""

    coherent_part: np.ndarray
    lindblad_part: np.ndarray
    qcr_part: np.ndarray | None

    @cached_property
    def total(self) -> np.ndarray:
        out = self.coherent_part + self.lindblad_part
        if self.qcr_part is not None:
            out = out + self.qcr_part
        return out

    @cached_property
    def norm_inf(self) -> float:
        return float(np.max(np.sum(np.abs(self.total), axis=1)))

    @property
    def n(self) -> int:
        return int(round(math.sqrt(self.total.shape[0])))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        n = self.n
        return (self.total @ rho.reshape(n * n)).reshape(n, n)

    def trace_defect(self) -> float:
        """Norm of trace composed with the generator; zero for a valid L."""
        n = self.n
        row = self.total.reshape(n, n, n * n)[np.arange(n), np.arange(n)].sum(axis=0)
        return float(np.max(np.abs(row)))


def assemble_generator(
    spectrum: Spectrum,
    params: SystemParams,
    table: RateTable | None = None,
) -> Generator:
    return Generator(
        coherent_part=coherent_superop(spectrum.energies),
        lindblad_part=lindblad_dissipators(spectrum, params.kappa, params.gamma_p),
        qcr_part=qcr_superop(table) if table is not None else None,
    )


def initial_state(spectrum: Spectrum, name: str) -> np.ndarray:
    """Named initial density matrix in the eigenbasis."""
    n = spectrum.n_keep
    rho = np.zeros((n, n), dtype=complex)
    if name in ("phi_alpha", "phi_minus_alpha"):
        s = 1.0 if name == "phi_alpha" else -1.0
        w = np.zeros(n)
        w[0] = 1.0 / math.sqrt(2.0)
        w[1] = s / math.sqrt(2.0)
        rho = np.outer(w, w).astype(complex)
    elif name.startswith("phi") and name[3:].isdigit():
        k = int(name[3:])
        if k >= n:
            raise ValueError(
                f"initial state {name!r} outside the {n} retained levels")
        rho[k, k] = 1.0
    else:
        raise ValueError(
            f"unknown initial state {name!r}; expected phi<k>, "
            f"phi_alpha or phi_minus_alpha")
    return rho


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray            # (nt, n, n)
    trace_drift: float
    herm_drift: float
    min_eigenvalue: float

    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    def qubit_population(self) -> np.ndarray:
        pops = self.populations()
        return pops[:, 0] + pops[:, 1]

    def branch_population(self, sign: float = 1.0) -> np.ndarray:
        """Overlap with (e0 + sign e1)/sqrt(2), the cat-branch projector."""
        p = 0.5 * (np.real(self.states[:, 0, 0]) + np.real(self.states[:, 1, 1]))
        return p + sign * np.real(self.states[:, 0, 1])


def _step_matrix(total: np.ndarray, h: float) -> np.ndarray:
    n2 = total.shape[0]
    out = np.eye(n2, dtype=complex)
    term = np.eye(n2, dtype=complex)
    hl = h * total
    for k in range(1, 5):
        term = term @ hl / k
        out = out + term
    return out


class _Propagator:
    """Caches interval-advance matrices per (generator, dt)."""

    def __init__(self, h_step: float | None):
        self.h_step = h_step
        self._cache: dict[tuple[int, float], np.ndarray] = {}

    def _resolve_h(self, gen: Generator, dt: float) -> float:
        h_max = _STEP_SAFETY / gen.norm_inf
        h = self.h_step if self.h_step is not None else h_max
        for _ in range(_MAX_HALVINGS + 1):
            if h <= h_max:
                break
            h *= 0.5
        else:
            raise EvolveError(
                f"step size {self.h_step:.3e} s cannot be halved below the "
                f"stability bound {h_max:.3e} s within {_MAX_HALVINGS} halvings")
        return min(h, dt)

    def advance(self, gen: Generator, dt: float, vec: np.ndarray) -> np.ndarray:
        if dt <= 0.0:
            return vec
        key = (id(gen), dt)
        mat = self._cache.get(key)
        if mat is None:
            h = self._resolve_h(gen, dt)
            n_steps = max(1, math.ceil(dt / h - 1e-12))
            mat = np.linalg.matrix_power(
                _step_matrix(gen.total, dt / n_steps), n_steps)
            self._cache[key] = mat
        return mat @ vec


def evolve(
    rho0: np.ndarray,
    generators: Generator | tuple[Generator, Generator],
    schedule: dict | None,
    t_grid: np.ndarray,
    h_step: float | None = None,
) -> Trajectory:
    """Propagate rho0 across t_grid.

    generators: a single generator, or (qcr_off, qcr_on) switched at
    schedule['t_qcr_on'].  Output states are recorded at every grid time.
    """
    t_grid = np.asarray(t_grid, float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) < 0):
        raise EvolveError("t_grid must be a non-decreasing 1-d array")
    rho0 = np.asarray(rho0, complex)
    n = rho0.shape[0]
    if rho0.shape != (n, n):
        raise EvolveError("rho0 must be square")
    if abs(np.trace(rho0) - 1.0) > 1e-8:
        raise EvolveError(f"rho0 trace deviates from 1 by {abs(np.trace(rho0)-1):.2e}")

    if isinstance(generators, Generator):
        gen_pair = (generators, generators)
        t_on = None
    else:
        gen_pair = tuple(generators)
        t_on = (schedule or {}).get("t_qcr_on")

    def gen_at(t0: float) -> Generator:
        if t_on is None:
            return gen_pair[0]
        return gen_pair[1] if t0 >= t_on else gen_pair[0]

    prop = _Propagator(h_step)
    vec = rho0.reshape(n * n).copy()
    states = np.empty((t_grid.size, n, n), dtype=complex)
    t_now = float(t_grid[0])
    states[0] = vec.reshape(n, n)
    normalized_time = 0.0
    for k in range(1, t_grid.size):
        t_next = float(t_grid[k])
        while t_now < t_next - 1e-18 * max(1.0, abs(t_next)):
            seg_end = t_next
            if t_on is not None and t_now < t_on < t_next:
                seg_end = float(t_on)
            gen = gen_at(t_now)
            vec = prop.advance(gen, seg_end - t_now, vec)
            normalized_time += (seg_end - t_now) * gen.norm_inf
            t_now = seg_end
        t_now = t_next
        states[k] = vec.reshape(n, n)

    traces = np.abs(np.einsum("tii->t", states) - 1.0)
    herms = np.max(np.abs(states - states.conj().transpose(0, 2, 1)), axis=(1, 2))
    eigs = np.linalg.eigvalsh(0.5 * (states + states.conj().transpose(0, 2, 1)))
    drift = float(np.max(traces))
    allowed = _TRACE_TOL * max(1.0, normalized_time)
    if drift > allowed:
        raise EvolveError(f"trace drifted by {drift:.2e} (allowed {allowed:.2e})")
    return Trajectory(
        times=t_grid.copy(),
        states=states,
        trace_drift=drift,
        herm_drift=float(np.max(herms)),
        min_eigenvalue=float(np.min(eigs)),
    )


def steady_state(generator: Generator) -> tuple[np.ndarray, float]:
    """Unique trace-one kernel element of the generator.

    Solves the trace-replaced linear system and verifies the residual
    against 1e-10 of the generator norm; diagnoses a degenerate kernel via
    singular values if the direct solve fails.
    """
    total = generator.total
    n = generator.n
    n2 = n * n
    a = total.copy()
    a[0, :] = 0.0
    a[0, :: n + 1] = 1.0
    b = np.zeros(n2, dtype=complex)
    b[0] = 1.0

    x = None
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        pass
    if x is not None:
        residual = float(np.max(np.abs(total @ x)))
        if residual <= 1e-10 * generator.norm_inf:
            rho = x.reshape(n, n)
            rho = 0.5 * (rho + rho.conj().T)
            rho /= np.trace(rho).real
            return rho, residual

    svals = np.linalg.svd(total, compute_uv=False)
    null_tol = max(1e-13 * svals[0], 1e4 * np.finfo(float).eps * svals[0])
    null_dim = int(np.sum(svals < null_tol))
    if null_dim > 1:
        raise SteadyStateError(
            f"steady state not unique: generator kernel has dimension "
            f"{null_dim} (e.g. no dissipation selects a single state)")
    achieved = float(np.max(np.abs(total @ x))) if x is not None else float("inf")
    raise SteadyStateError(
        f"steady-state residual {achieved:.3e} exceeds "
        f"{1e-10 * generator.norm_inf:.3e}")


def husimi_q(
    rho_eig: np.ndarray,
    spectrum: Spectrum,
    re_axis: np.ndarray,
    im_axis: np.ndarray,
) -> np.ndarray:
    """Husimi Q(alpha) = <alpha| rho |alpha> / pi on a phase-space grid.

    Returns Q with shape (len(im_axis), len(re_axis)); integrates to 1 over
    the full plane with measure d^2alpha.
    """
    re_axis = np.asarray(re_axis, float)
    im_axis = np.asarray(im_axis, float)
    alphas = (re_axis[None, :] + 1j * im_axis[:, None]).ravel()
    peak = float(np.max(np.abs(alphas))) if alphas.size else 0.0
    n_fock = spectrum.n_fock
    # Validate the worst-case truncation once instead of per grid point.
    # A norm deficit d at the grid corner perturbs Q there by at most
    # ~2d/pi, far below the peak scale 1/pi, so a loose bound suffices.
    coherent_state(peak, n_fock, tol=1e-4)
    m = np.arange(1, n_fock)
    steps = alphas[:, None] / np.sqrt(m)[None, :]
    amps = np.concatenate(
        [np.ones((alphas.size, 1), complex), np.cumprod(steps, axis=1)], axis=1)
    amps *= np.exp(-0.5 * np.abs(alphas) ** 2)[:, None]
    rho_f = spectrum.vectors @ np.asarray(rho_eig, complex) @ spectrum.vectors.conj().T
    q = np.real(np.einsum("gm,mn,gn->g", amps.conj(), rho_f, amps)) / math.pi
    return q.reshape(im_axis.size, re_axis.size)


def density_metrics(rho: np.ndarray) -> dict[str, float]:
    """Hermiticity, trace and positivity diagnostics of a density matrix."""
    rho = np.asarray(rho, complex)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    sym = 0.5 * (rho + rho.conj().T)
    eigs = np.linalg.eigvalsh(sym)
    return {
        "trace_error": float(abs(np.trace(rho) - 1.0)),
        "hermiticity": herm,
        "min_eigenvalue": float(eigs[0]),
    }
