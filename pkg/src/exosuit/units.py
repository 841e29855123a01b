"""Conversions between the paper-style units (cm, kPa, deg) and SI.

All library code works in SI; these helpers sit at I/O boundaries only.
"""

import math

import numpy as np

CM = 0.01
KPA = 1000.0
N_PER_CM2 = 1.0e4  # N/cm^2 -> N/m^2


def cm_to_m(x):
    return np.multiply(x, CM) if isinstance(x, np.ndarray) else x * CM


def m_to_cm(x):
    return np.divide(x, CM) if isinstance(x, np.ndarray) else x / CM


def kpa_to_pa(x):
    return np.multiply(x, KPA) if isinstance(x, np.ndarray) else x * KPA


def pa_to_kpa(x):
    return np.divide(x, KPA) if isinstance(x, np.ndarray) else x / KPA


def deg_to_rad(x):
    return np.radians(x) if isinstance(x, np.ndarray) else math.radians(x)


def rad_to_deg(x):
    return np.degrees(x) if isinstance(x, np.ndarray) else math.degrees(x)


# quantity name -> (to_si, from_si) for the CLI's --units switch
PAPER_UNITS = {
    "length": (cm_to_m, m_to_cm),
    "pressure": (kpa_to_pa, pa_to_kpa),
    "angle": (deg_to_rad, rad_to_deg),
}


def to_si(value, quantity: str, units: str = "paper"):
    if units == "si":
        return value
    return PAPER_UNITS[quantity][0](value)


def from_si(value, quantity: str, units: str = "paper"):
    if units == "si":
        return value
    return PAPER_UNITS[quantity][1](value)
