"""Photon-assisted tunneling integrals through a Dynes-broadened NIS junction.

All energies are frequencies (E/h, Hz).  The two elementary integrals are

  forward(offset)  = int n_s(eps) [1 - f_S(eps)] f_N(eps + offset) d eps
  backward(offset) = int n_s(eps) f_S(eps) [1 - f_N(eps + offset)] d eps

with n_s the smeared superconductor density of states at lead temperature
T_S and f_N the island Fermi function at T_N.  Rate formulas supply the
offset; the normalization 1/h is absorbed by the Hz energy convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChargeDistributionError
from .params import SystemParams
from .quad import adaptive_gk

_THERMAL_WINDOW = 35.0   # Fermi factors are machine-zero this many k_B T out
_PQ_TAIL_LIMIT = 1e-10   # required probability at the charge cutoff


def dynes_dos(eps, gap_hz: float, gamma_dynes: float):
    """Smeared superconducting density of states, normalized and even."""
    z = (np.asarray(eps, float) + 1j * gamma_dynes * gap_hz) / gap_hz
    return np.abs(np.real(z / np.sqrt(z * z - 1.0)))


def fermi(eps, t_hz: float):
    """Fermi factor at thermal frequency t = k_B T / h; step function at t=0."""
    eps = np.asarray(eps, float)
    if t_hz == 0.0:
        return np.where(eps < 0, 1.0, np.where(eps > 0, 0.0, 0.5))
    return 0.5 * (1.0 - np.tanh(eps / (2.0 * t_hz)))


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolved quadrature plan for one tunneling integral."""

    rel_tol: float
    window: tuple[float, float]
    split_points: tuple[float, ...]
    sqrt_edges: tuple[float, ...]


def build_quadrature_spec(
    offset: float,
    gap_hz: float,
    temp_s_hz: float,
    temp_n_hz: float,
    rel_tol: float,
) -> QuadratureSpec:
    """Window covering both Fermi edges plus the gap singularities."""
    pad = _THERMAL_WINDOW * max(temp_s_hz, temp_n_hz)
    lo = min(0.0, -offset) - pad
    hi = max(0.0, -offset) + pad
    splits = {lo, hi, 0.0, -offset}
    edges = tuple(e for e in (-gap_hz, gap_hz) if lo < e < hi)
    splits.update(edges)
    inside = tuple(sorted(x for x in splits if lo <= x <= hi))
    return QuadratureSpec(rel_tol=rel_tol, window=(lo, hi),
                          split_points=inside, sqrt_edges=edges)


def pat_integral(
    offset: float,
    direction: str,
    gap_hz: float,
    gamma_dynes: float,
    temp_s_hz: float,
    temp_n_hz: float,
    rel_tol: float = 1e-10,
    quad: QuadratureSpec | None = None,
) -> float:
    """One tunneling integral; direction is 'forward' or 'backward'."""
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be forward or backward, got {direction!r}")
    forward = direction == "forward"
    if temp_s_hz == 0.0 and temp_n_hz == 0.0:
        # Sharp Fermi seas: support is (0, -offset) or (-offset, 0) exactly.
        if forward and offset >= 0.0:
            return 0.0
        if not forward and offset <= 0.0:
            return 0.0
    if quad is None:
        quad = build_quadrature_spec(offset, gap_hz, temp_s_hz, temp_n_hz, rel_tol)

    def integrand(eps):
        ns = dynes_dos(eps, gap_hz, gamma_dynes)
        if forward:
            return ns * (1.0 - fermi(eps, temp_s_hz)) * fermi(eps + offset, temp_n_hz)
        return ns * fermi(eps, temp_s_hz) * (1.0 - fermi(eps + offset, temp_n_hz))

    # Exponentially suppressed integrals hit the roundoff floor long before
    # a pure relative tolerance; resolve them to rel_tol of the thermal
    # scale instead, which is the absolute level at which they enter rates.
    abs_floor = quad.rel_tol * max(temp_s_hz, temp_n_hz)
    value, _err = adaptive_gk(
        integrand,
        breakpoints=quad.split_points,
        sqrt_edges=quad.sqrt_edges,
        rel_tol=quad.rel_tol,
        abs_tol=abs_floor,
    )
    return value


class PatIntegrator:
    """Caches tunneling integrals keyed by (direction, offset).

    Degenerate eigenstates are energy-snapped upstream, so transitions that
    must interfere share bit-identical offsets and therefore identical
    cached values; interference cancellations then happen algebraically.
    """

    def __init__(self, gap_hz: float, gamma_dynes: float, temp_s_hz: float,
                 temp_n_hz: float, rel_tol: float = 1e-10):
        self.gap_hz = gap_hz
        self.gamma_dynes = gamma_dynes
        self.temp_s_hz = temp_s_hz
        self.temp_n_hz = temp_n_hz
        self.rel_tol = rel_tol
        self._cache: dict[tuple[bool, float], float] = {}

    @classmethod
    def from_params(cls, params: SystemParams) -> "PatIntegrator":
        return cls(params.gap_hz, params.gamma_dynes, params.t_s_hz,
                   params.t_n_hz, params.quad_rel_tol)

    def _lookup(self, forward: bool, offset: float) -> float:
        key = (forward, offset)
        hit = self._cache.get(key)
        if hit is None:
            hit = pat_integral(
                offset,
                "forward" if forward else "backward",
                self.gap_hz, self.gamma_dynes,
                self.temp_s_hz, self.temp_n_hz,
                self.rel_tol,
            )
            self._cache[key] = hit
        return hit

    def forward(self, offset: float) -> float:
        return self._lookup(True, float(offset))

    def backward(self, offset: float) -> float:
        return self._lookup(False, float(offset))

    def __len__(self) -> int:
        return len(self._cache)


def forward_p(integrator: PatIntegrator, energy_hz: float) -> float:
    """Single-electron forward tunneling strength at energy cost -energy.

    This is the quantity whose ratios build the island charge distribution;
    it satisfies forward_p(E) / forward_p(-E) = exp(E h / k_B T) when both
    baths share temperature T.
    """
    return integrator.forward(-energy_hz)


def elastic_weight(m: int, rho_c: float) -> float:
    """Photon-sidebandless matrix-element weight of Fock level m.

    Cancels exactly in the charge-distribution ratios; exposed so tests can
    verify that independence with the full rate prefactors in place.
    """
    from scipy.special import eval_laguerre

    return float(math.exp(-rho_c) * eval_laguerre(m, rho_c) ** 2)


def charge_transition_rates(
    params: SystemParams,
    integrator: PatIntegrator,
    q: int,
    m: int = 0,
    bias_v: float | None = None,
) -> tuple[float, float]:
    """Elastic island-charge rates (gain, loss) at charge q, Fock level m."""
    if bias_v is None:
        bias_v = params.bias_v
    weight = elastic_weight(m, params.rho_c) * params.r_ratio
    e_gain = params.e_island * (1.0 + 2.0 * q)
    e_loss = params.e_island * (1.0 - 2.0 * q)
    gain = weight * (forward_p(integrator, bias_v - e_gain)
                     + forward_p(integrator, -bias_v - e_gain))
    loss = weight * (forward_p(integrator, bias_v - e_loss)
                     + forward_p(integrator, -bias_v - e_loss))
    return gain, loss


@dataclass(frozen=True)
class ChargeDistribution:
    """Symmetric stationary distribution of the island charge."""

    q_values: tuple[int, ...]
    probs: tuple[float, ...]

    def p(self, q: int) -> float:
        return self.probs[self.q_values.index(q)]

    def items(self):
        return zip(self.q_values, self.probs)


def charge_distribution(
    params: SystemParams,
    integrator: PatIntegrator | None = None,
    pumped: bool = False,
) -> ChargeDistribution:
    """Detailed-balance charge distribution from elastic rate ratios.

    The Fock-level weight cancels between numerator and denominator, so the
    distribution is independent of the oscillator state.  The cutoff must
    carry at most 1e-10 probability; one automatic doubling of q_max is
    attempted before giving up.

    By default the ratios are evaluated in equilibrium (zero bias), where
    detailed balance makes them exactly Boltzmann factors in the charging
    energy.  Evaluating them at the operating bias instead (pumped=True)
    lets the subgap leakage floor of the broadened density of states drive
    the island charge, which swamps the thermally activated rates at low
    temperature; island charge relaxation is dominated by inelastic
    processes outside this model, so the pumped variant is offered only to
    quantify that sensitivity.
    """
    if integrator is None:
        integrator = PatIntegrator.from_params(params)
    bias_v = params.bias_v if pumped else 0.0

    def build(q_max: int) -> list[float]:
        rel = [1.0]
        for q in range(1, q_max + 1):
            gain_prev, _ = charge_transition_rates(
                params, integrator, q - 1, bias_v=bias_v)
            _, loss_here = charge_transition_rates(
                params, integrator, q, bias_v=bias_v)
            if loss_here <= 0.0:
                raise ChargeDistributionError(
                    f"vanishing charge-loss rate at q={q}; distribution undefined")
            rel.append(rel[-1] * gain_prev / loss_here)
        return rel

    q_max = params.q_max
    for attempt in range(2):
        rel = build(q_max)
        z = rel[0] + 2.0 * sum(rel[1:])
        probs_pos = [r / z for r in rel]
        if probs_pos[-1] <= _PQ_TAIL_LIMIT:
            qs = tuple(range(-q_max, q_max + 1))
            probs = tuple(probs_pos[abs(q)] for q in qs)
            return ChargeDistribution(q_values=qs, probs=probs)
        if attempt == 0:
            q_max *= 2
    raise ChargeDistributionError(
        f"island charge distribution still carries {probs_pos[-1]:.2e} "
        f"probability at |q|={q_max}; raise q_max")
