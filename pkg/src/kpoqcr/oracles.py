"""Independent closed forms and a self-check suite for the numerical core.

Everything here is derived through a route different from the production
code: scalar cat-state algebra instead of eigenbasis tensors, matrix
exponentials instead of Laguerre recurrences, flat-density-of-states
integrals with a thermal closed form instead of the adaptive quadrature.
The `validate` command runs `run_oracle_suite` and reports each comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .junction import (PatIntegrator, charge_distribution, dynes_dos, fermi,
                       pat_integral)
from .params import SystemParams
from .rates import (PQ_FLOOR, EtaTable, displacement_matrix, eta_table,
                    hermiticity_residual, qcr_bitflip_rate, rate_table,
                    trace_residual)
from .spectrum import (Spectrum, build_fock_operators, cat_states,
                       diagonalize_kpo)

_SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Cat-state scalar algebra


def cat_normalizations(alpha: float) -> tuple[float, float]:
    """Normalizations of (|a> + |-a>) and (|a> - |-a>)."""
    u = math.exp(-2.0 * alpha * alpha)
    return 1.0 / math.sqrt(2.0 * (1.0 + u)), 1.0 / math.sqrt(2.0 * (1.0 - u))


def branch_annihilation_element(alpha: float) -> float:
    """<phi_-alpha| a |phi_alpha> for exact cat branches."""
    u = math.exp(-2.0 * alpha * alpha)
    return alpha * u / math.sqrt(1.0 - u * u)


def branch_number_element(alpha: float) -> float:
    """<phi_-alpha| a^dag a |phi_alpha> for exact cat branches."""
    u = math.exp(-2.0 * alpha * alpha)
    return -2.0 * alpha * alpha * u / (1.0 - u * u)


def dephasing_bitflip_ratio(alpha: float) -> float:
    """Bit-flip rate under pure dephasing divided by the angular rate.

    Written as the combination of cat normalizations in which the second
    bracket vanishes identically; kept verbatim so it stays an independent
    expression rather than a copy of the simplified quadratic form.
    """
    u = math.exp(-2.0 * alpha * alpha)
    n_p, n_m = cat_normalizations(alpha)
    x = (n_p + n_m) / _SQRT2
    y = (n_p - n_m) / _SQRT2
    s = x * x + y * y
    p = 2.0 * x * y
    a2 = alpha * alpha
    a4 = a2 * a2
    first = 2.0 * a4 * (s * u - p) ** 2
    second = -2.0 * (a2 * (-s * u + p) + a4 * (s * u + p)) * (s * u + p)
    return first + second


def photonloss_bitflip_ratio(alpha: float) -> float:
    """Bit-flip rate under single-photon loss divided by half the angular
    loss rate; equals 2 |<phi_-a|a|phi_a>|^2 and approaches
    2 alpha^2 exp(-4 alpha^2) for large alpha."""
    u2 = math.exp(-4.0 * alpha * alpha)
    return 2.0 * alpha * alpha * u2 / (1.0 - u2)


def displaced_excited_fock(alpha: float, parity: int,
                           n_fock: int | None = None) -> np.ndarray:
    """Parity combination of displaced one-photon states, Fock amplitudes.

    (D(alpha) -/+ D(-alpha))|1> normalized, the large-alpha form of the
    first excited pair; parity +1 keeps even Fock levels, -1 odd ones.
    Uses <m|D(alpha)|1> = <m|alpha> (m - alpha^2)/alpha.
    """
    if n_fock is None:
        n_fock = int(alpha * alpha + 12.0 * alpha + 25.0)
    from .spectrum import coherent_state

    m = np.arange(n_fock)
    amps = coherent_state(alpha, n_fock) * (m - alpha * alpha) / alpha
    amps[(1 if parity == 1 else 0)::2] = 0.0
    return amps / np.linalg.norm(amps)


def branch_element_fock(alpha: float, which: str, n_fock: int | None = None) -> complex:
    """Numeric twin of the branch matrix elements via explicit Fock vectors."""
    if n_fock is None:
        n_fock = int(alpha * alpha + 12.0 * alpha + 25.0)
    cats = cat_states(alpha, n_fock)
    ops = build_fock_operators(n_fock)
    op = ops.a if which == "a" else ops.num
    return complex(cats.minus.conj() @ (op @ cats.plus))


# ---------------------------------------------------------------------------
# Transition factors on the numerically diagonalized spectrum


def normalized_spectrum(alpha: float, n_fock: int | None = None,
                        n_keep: int = 12) -> Spectrum:
    """Spectrum of the oscillator scaled so eigenvectors depend on alpha only.

    With chi = 2 the cat-pair eigenvalue is alpha**4 exactly, so the
    degeneracy tolerance scales with that instead of the lab-frame default.
    """
    if n_fock is None:
        n_fock = int(alpha * alpha + 12.0 * alpha + 25.0)
    params = SystemParams(chi=2.0, beta=alpha * alpha,
                          n_fock=n_fock, n_keep=n_keep,
                          match_tol=1e-6 * max(1.0, alpha ** 4))
    return diagonalize_kpo(params)


def lindblad_transition_factor(spectrum: Spectrum, which: str,
                               initial: np.ndarray, final: np.ndarray) -> float:
    """2 |<final| O |initial>|^2 with O = a or a^dag a in the eigenbasis.

    Multiplying by the dissipator prefactor (half the angular loss rate for
    a, the full angular dephasing rate for a^dag a) gives the transition
    rate for orthogonal initial/final states.
    """
    ops = build_fock_operators(spectrum.n_fock)
    op = spectrum.project(ops.a if which == "a" else ops.num)
    amp = complex(np.asarray(final).conj() @ (op @ np.asarray(initial)))
    return 2.0 * abs(amp) ** 2


def eigen_unit(spectrum: Spectrum, index: int) -> np.ndarray:
    vec = np.zeros(spectrum.n_keep, dtype=complex)
    vec[index] = 1.0
    return vec


def branch_vector(spectrum: Spectrum, sign: float = 1.0) -> np.ndarray:
    vec = np.zeros(spectrum.n_keep, dtype=complex)
    vec[0] = 1.0 / _SQRT2
    vec[1] = sign / _SQRT2
    return vec


# ---------------------------------------------------------------------------
# Junction-side closed forms


def flat_dos_forward(offset_hz: float, t_hz: float) -> float:
    """Tunneling integral with a flat density of states at equal temperatures:
    offset / (exp(offset/t) - 1)."""
    if t_hz <= 0.0:
        return -offset_hz if offset_hz < 0.0 else 0.0
    z = offset_hz / t_hz
    if z > 690.0:
        return 0.0
    if abs(z) < 1e-12:
        return t_hz * (1.0 - 0.5 * z)
    return offset_hz / math.expm1(z)


def threshold_voltages(gap_hz: float, omega_rf: float) -> tuple[float, float, float]:
    """Zero-temperature onsets (Hz): two-photon cooling, one-photon cooling,
    one-photon excitation."""
    return (gap_hz - 2.0 * omega_rf, gap_hz - omega_rf, gap_hz + omega_rf)


def qcr_bitflip_closed(params: SystemParams, spectrum: Spectrum, eta: EtaTable,
                       pq, integrator: PatIntegrator) -> float:
    """Branch-flip rate of the tunneling generator from the signed sums of
    sideband amplitudes over the degenerate qubit pair.

    Independent of the dense-tensor route: the gamma2/gamma3 parts cancel
    for this initial state and the gamma1 part collapses to
    |eta00 +/- eta01 - eta10 -/+ eta11|^2 per sideband.
    """
    if abs(spectrum.energies[0] - spectrum.energies[1]) != 0.0:
        raise ValueError("qubit pair is not degenerate after snapping")
    c = 0.5 * params.r_ratio
    charges = [(q, p) for q, p in pq.items() if p >= PQ_FLOOR]
    total = 0.0
    for dm, eta_f in eta.f.items():
        eta_b = eta.b[dm]
        a_f = eta_f[0, 0] + eta_f[0, 1] - eta_f[1, 0] - eta_f[1, 1]
        a_b = eta_b[0, 0] + eta_b[0, 1] - eta_b[1, 0] - eta_b[1, 1]
        wf = abs(a_f) ** 2
        wb = abs(a_b) ** 2
        if wf == 0.0 and wb == 0.0:
            continue
        for q, p in charges:
            base_f = params.e_island * (1.0 + 2 * q) + params.omega_rf * dm - params.bias_v
            base_b = -params.e_island * (1.0 - 2 * q) - params.omega_rf * dm - params.bias_v
            acc = 0.0
            if wf != 0.0:
                acc += integrator.forward(base_f) * wf
            if wb != 0.0:
                acc += integrator.backward(base_b) * wb
            total += p * acc
    return c * total


# ---------------------------------------------------------------------------
# Self-check suite


@dataclass
class OracleReport:
    name: str
    computed: float
    reference: float
    rel_err: float
    tol: float
    passed: bool
    kind: str  # closed-form | cross-check | published

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"{status:4s}  {self.name:34s} computed={self.computed: .9e} "
                f"reference={self.reference: .9e} rel_err={self.rel_err:.2e} "
                f"tol={self.tol:.1e} [{self.kind}]")


def _report(name: str, computed: float, reference: float, tol: float,
            kind: str, greater: bool = False) -> OracleReport:
    if greater:
        rel = computed / reference if reference != 0.0 else math.inf
        passed = computed > reference
    else:
        denom = max(abs(computed), abs(reference), 1e-300)
        rel = abs(computed - reference) / denom
        passed = rel <= tol
    return OracleReport(name=name, computed=float(computed),
                        reference=float(reference), rel_err=float(rel),
                        tol=tol, passed=bool(passed), kind=kind)


def _report_abs(name: str, computed: float, reference: float, atol: float,
                kind: str) -> OracleReport:
    err = abs(computed - reference)
    return OracleReport(name=name, computed=float(computed),
                        reference=float(reference), rel_err=float(err),
                        tol=atol, passed=bool(err <= atol), kind=kind)


def run_oracle_suite(params: SystemParams | None = None) -> list[OracleReport]:
    if params is None:
        params = SystemParams()
    reports: list[OracleReport] = []

    # Superconducting density of states at characteristic points.
    gap = params.gap_hz
    gd = params.gamma_dynes
    reports.append(_report(
        "dynes_dos_subgap_floor",
        dynes_dos(0.0, gap, gd), gd / math.sqrt(1.0 + gd * gd),
        1e-12, "closed-form"))
    x = 10.0
    reports.append(_report(
        "dynes_dos_far_above_gap",
        dynes_dos(x * gap, gap, gd), x / math.sqrt(x * x - 1.0),
        1e-6, "closed-form"))
    eps = np.linspace(-5.0, 5.0, 101) * gap
    reports.append(_report(
        "fermi_particle_hole_sum",
        float(np.max(np.abs(fermi(eps, params.t_n_hz)
                            + fermi(-eps, params.t_n_hz)))),
        1.0, 1e-12, "closed-form"))

    # Tunneling integrals against the flat-DOS thermal closed form.
    t_hz = params.t_n_hz
    for offset in (-5e9, 3e9):
        got = pat_integral(offset, "forward", gap, 1e4, t_hz, t_hz,
                           rel_tol=1e-10)
        reports.append(_report(
            f"flat_dos_forward_{offset/1e9:+.0f}GHz",
            got, flat_dos_forward(offset, t_hz), 1e-4, "cross-check"))
    e = 5e9
    fwd = pat_integral(e, "forward", gap, gd, t_hz, t_hz, rel_tol=1e-11)
    bwd = pat_integral(e, "backward", gap, gd, t_hz, t_hz, rel_tol=1e-11)
    reports.append(_report(
        "detailed_balance_5GHz",
        fwd / bwd, math.exp(-e / t_hz), 1e-8, "closed-form"))

    # Sideband displacement amplitudes against a dense matrix exponential.
    rho_c = 0.3
    n_small, n_big = 24, 48
    ops = build_fock_operators(n_big)
    dense = expm(1j * math.sqrt(rho_c) * (ops.a + ops.adag))
    block = displacement_matrix(n_small, rho_c, 1.0)
    reports.append(_report_abs(
        "displacement_vs_expm",
        float(np.max(np.abs(block - dense[:n_small, :n_small]))),
        0.0, 1e-10, "cross-check"))

    # Parity selection of the sideband tensors.
    spec = diagonalize_kpo(params)
    eta = eta_table(spec, params.rho_c, params.dm_max)
    worst = 0.0
    for dm, mat in eta.f.items():
        forbidden = np.not_equal(
            np.outer(spec.parity, spec.parity), (-1.0) ** abs(dm))
        if np.any(forbidden):
            worst = max(worst, float(np.max(np.abs(mat[forbidden]))))
    reports.append(_report_abs(
        "eta_parity_selection", worst, 0.0, 0.0, "closed-form"))

    # Intrinsic-channel bit-flip rates, printed form vs Fock quadratic form.
    alpha = params.alpha
    reports.append(_report(
        "dephasing_bitflip_alpha2",
        dephasing_bitflip_ratio(2.0),
        2.0 * abs(branch_element_fock(2.0, "n")) ** 2,
        1e-8, "cross-check"))
    reports.append(_report(
        "photonloss_bitflip_alpha1p5",
        photonloss_bitflip_ratio(1.5),
        2.0 * abs(branch_element_fock(1.5, "a")) ** 2,
        1e-8, "cross-check"))

    # Deexcitation toward the qubit approaches the bare loss rate when the
    # excited state is the displaced one-photon combination the asymptote
    # is stated for; the matrix element is then exact up to the overlap of
    # opposite coherent branches.
    spec25 = normalized_spectrum(2.5)
    psi3 = displaced_excited_fock(2.5, -1, spec25.n_fock)
    a25 = build_fock_operators(spec25.n_fock).a
    el = complex(spec25.vectors[:, 0] @ (a25 @ psi3))
    reports.append(_report(
        "deexcitation_limit_alpha2p5", abs(el) ** 2, 1.0, 2e-2, "published"))

    # Against the true eigenstate the approach is algebraic in 1/alpha^2,
    # about 10 percent at alpha = 2.5; pinned as a regression anchor.
    factor = lindblad_transition_factor(
        spec25, "a", eigen_unit(spec25, 3), eigen_unit(spec25, 0))
    reports.append(_report(
        "deexcitation_eigenstate_alpha2p5", 0.5 * factor, 1.0, 1.2e-1,
        "cross-check"))

    # Dephasing drives leakage out of the qubit faster than gamma_p itself.
    spec_a = normalized_spectrum(alpha)
    leak = max(
        lindblad_transition_factor(spec_a, "n", branch_vector(spec_a),
                                   eigen_unit(spec_a, k))
        for k in (2, 3))
    reports.append(_report(
        "dephasing_leakage_exceeds_rate", leak, 1.0, 0.0,
        "published", greater=True))

    # Published zero-temperature onsets of the photon-assisted processes.
    th = threshold_voltages(params.gap_hz, params.omega_rf)
    for name, got, ref in zip(
            ("threshold_two_photon_cooling", "threshold_cooling",
             "threshold_excitation"),
            th, (34.36e9, 41.36e9, 55.36e9)):
        reports.append(_report_abs(name, got, ref, 0.1e9, "published"))

    # Structural identities of a reduced tunneling-rate table.
    small = params.replace(n_keep=6, dm_max=2, quad_rel_tol=1e-8)
    spec6 = diagonalize_kpo(small)
    eta6 = eta_table(spec6, small.rho_c, small.dm_max)
    integ = PatIntegrator.from_params(small)
    pq = charge_distribution(small, integ)
    table = rate_table(small, spec6, eta=eta6, pq=pq, integrator=integ)
    reports.append(_report_abs(
        "rate_table_trace_identity",
        trace_residual(table), 0.0, 1e-12, "closed-form"))
    reports.append(_report_abs(
        "rate_table_hermiticity",
        hermiticity_residual(table), 0.0, 1e-12, "closed-form"))

    # Generator-route bit-flip against the signed-amplitude closed form.
    # The tensor route cancels entries of order max|core2| down to the
    # branch-flip rate, so agreement is limited by that roundoff floor.
    got = qcr_bitflip_rate(table)
    want = qcr_bitflip_closed(small, spec6, eta6, pq, integ)
    floor = 1e-11 * max(abs(v) for v in table.core2.values())
    rep = _report_abs("qcr_bitflip_signed_sum", got, want,
                      max(1e-8 * abs(want), floor), "cross-check")
    reports.append(rep)

    return reports
