"""Shared fixtures.

The default-parameter spectrum, sideband table and tunneling integrator are
expensive enough to build once per session; tests must not mutate them.
"""
import numpy as np
import pytest

from kpoqcr import (PatIntegrator, SystemParams, charge_distribution,
                    diagonalize_kpo, eta_table, rate_table)


@pytest.fixture(scope="session")
def params():
    return SystemParams()


@pytest.fixture(scope="session")
def spectrum(params):
    return diagonalize_kpo(params)


@pytest.fixture(scope="session")
def eta(params, spectrum):
    return eta_table(spectrum, params.rho_c, params.dm_max)


@pytest.fixture(scope="session")
def integrator(params):
    return PatIntegrator.from_params(params)


@pytest.fixture(scope="session")
def pq(params, integrator):
    return charge_distribution(params, integrator)


@pytest.fixture(scope="session")
def table45(params, spectrum, eta, pq, integrator):
    """Full tensor table at the default 45 GHz bias."""
    return rate_table(params, spectrum, eta=eta, pq=pq, integrator=integrator)


@pytest.fixture(scope="session")
def small_params(params):
    """Reduced retained space; keeps tensor assembly cheap in unit tests."""
    return params.replace(n_keep=6, dm_max=2, quad_rel_tol=1e-8)


@pytest.fixture(scope="session")
def small_table(small_params):
    spec = diagonalize_kpo(small_params)
    eta6 = eta_table(spec, small_params.rho_c, small_params.dm_max)
    integ = PatIntegrator.from_params(small_params)
    pq6 = charge_distribution(small_params, integ)
    return rate_table(small_params, spec, eta=eta6, pq=pq6, integrator=integ)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260814)
