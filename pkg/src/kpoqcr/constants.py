"""Physical constants in the frequency units used throughout the package.

All energies are stored as frequencies E/h in Hz.  Conversions happen once,
at the parameter boundary, via the constants below (CODATA 2018).
"""

# Planck constant in ueV per GHz: E[ueV] = H_UEV_PER_GHZ * f[GHz].
H_UEV_PER_GHZ = 4.135667696

# Boltzmann constant over Planck constant, Hz per kelvin.
KB_HZ_PER_K = 2.0836619123e10

# von Klitzing constant h/e^2 in ohm.  Tunneling rates scale as R_K/R_T.
R_K_OHM = 25812.80745

TWO_PI = 6.283185307179586


def uev_to_hz(energy_uev: float) -> float:
    """Convert an energy in microelectronvolt to a frequency E/h in Hz."""
    return energy_uev / H_UEV_PER_GHZ * 1e9


def kelvin_to_hz(temperature_k: float) -> float:
    """Convert a temperature to its thermal frequency k_B T / h in Hz."""
    return temperature_k * KB_HZ_PER_K
