"""Internal unit system and conversions.

Internally hbar = 1, lengths are in micrometres and times in picoseconds.
Energies are therefore angular frequencies in rad/ps and the unit of mass
is hbar * ps / um**2, which is numerically equal to hbar in kg.
Conversions happen only at the I/O boundary (config loading, CSV output).
"""
from scipy.constants import hbar as HBAR_SI

UM = 1e-6
PS = 1e-12

MASS_UNIT_KG = HBAR_SI * PS / UM**2
ENERGY_UNIT_J = HBAR_SI / PS
VELOCITY_UNIT_M_PER_S = UM / PS


def kg_to_internal(m_kg):
    return m_kg / MASS_UNIT_KG


def internal_to_kg(m):
    return m * MASS_UNIT_KG


def joule_to_internal(e_j):
    return e_j / ENERGY_UNIT_J


def internal_to_joule(e):
    return e * ENERGY_UNIT_J


def rad_per_s_to_internal(w):
    return w * PS


def internal_to_rad_per_s(w):
    return w / PS


def velocity_to_m_per_s(v):
    return v * VELOCITY_UNIT_M_PER_S


def conversion_table():
    """Factors recorded in run metadata."""
    return {
        "length_unit_m": UM,
        "time_unit_s": PS,
        "mass_unit_kg": MASS_UNIT_KG,
        "energy_unit_J": ENERGY_UNIT_J,
        "velocity_unit_m_per_s": VELOCITY_UNIT_M_PER_S,
        "hbar_J_s": HBAR_SI,
    }
