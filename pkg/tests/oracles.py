"""Independent reference computations used by the tests.

These deliberately avoid the package's own rotation code: pulses are applied
as ``scipy.linalg.expm`` of the interaction Hamiltonian on a plain density
matrix ``rho`` (standard sign, ``rho_12 = <1|rho|2>``).
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

KET = np.eye(3)


def hamiltonian(pair: tuple[int, int], rabi: float) -> np.ndarray:
    """Resonant interaction ``(rabi/2)(|i><j| + |j><i|)`` between levels ``pair`` (0-based)."""
    i, j = pair
    h = np.zeros((3, 3), dtype=complex)
    h[i, j] = h[j, i] = rabi / 2.0
    return h


def pulse(rho: np.ndarray, pair: tuple[int, int], area: float) -> np.ndarray:
    """Resonant pulse of the given area (``rabi * duration``) with unit duration."""
    u = expm(-1j * hamiltonian(pair, area))
    return u @ rho @ u.conj().T


OPT = (0, 1)
CTL = (1, 2)


def ground() -> np.ndarray:
    return np.outer(KET[0], KET[0]).astype(complex)


def resonant_sign(sequence: list[tuple[tuple[int, int], float]], weak_area: float = 1e-3) -> float:
    """Ratio of the final optical coherence to the one left by a weak data pulse.

    ``sequence`` lists ``(pair, area)`` after the data pulse.  For a resonant
    atom the data coherence is purely imaginary, so the ratio is real: +1 for
    the absorptive orientation, -1 for the emissive one.
    """
    rho = pulse(ground(), OPT, weak_area)
    ref = rho[0, 1]
    for pair, area in sequence:
        rho = pulse(rho, pair, area)
    return complex(rho[0, 1] / ref)


def rabi_two_level(area: float) -> float:
    """Excited population of a resonant two-level atom after a pulse of ``area``."""
    return float(np.sin(area / 2.0) ** 2)
