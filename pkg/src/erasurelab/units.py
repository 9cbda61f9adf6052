"""Unit conventions and physical constants.

Everything internal runs in optical-tweezer units: positions in nm, forces
in pN, energies in pN nm, times in s.  Analysis outputs report energies in
units of k_B T.
"""

# Boltzmann constant in pN nm / K (CODATA: 1.380649e-23 J/K, 1 J = 1e21 pN nm)
KB = 1.380649e-2


def kbt(T: float) -> float:
    """Thermal energy k_B T in pN nm for a bath temperature in kelvin."""
    if T <= 0:
        raise ValueError(f"temperature must be positive, got {T}")
    return KB * T
