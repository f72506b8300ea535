"""Four-level 87Rb D1 atom: parameters, Hamiltonian, Lindblad dynamics.

Level ordering used everywhere in this package::

    index 0  |1>  5S1/2 F=1   (ground)
    index 1  |2>  5S1/2 F=2   (ground, +hbar*omega21)
    index 2  |3>  5P1/2 F'=1  (excited)
    index 3  |4>  5P1/2 F'=2  (excited, +hbar*omega43 above |3>)

The frame rotates at the photon carrier frequency on the optical
transitions, so only the hyperfine splittings and the probe detuning
appear on the diagonal.  The field variable is the complex slow envelope
in V/m; its carrier phase convention is fixed by the coupling
``H[3,1] = -1j * d31 * field`` and everything downstream (the propagation
source term in :mod:`rbpulse.solver`) follows from that single choice.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np
from scipy.constants import hbar

__all__ = [
    "GAMMA_D1",
    "D_FINE",
    "OMEGA_21",
    "OMEGA_43",
    "OMEGA_D1",
    "LevelIndex",
    "AtomicParams",
    "default_rb87_params",
    "hamiltonian",
    "lindblad_rhs",
    "thermal_state",
]

# 87Rb D1 line constants
GAMMA_D1 = 2.0 * np.pi * 5.746e6      # excited-state decay rate (rad/s)
D_FINE = 3.588e-29                    # fine-transition dipole moment (C m)
OMEGA_21 = 2.0 * np.pi * 6.834e9      # ground hyperfine splitting (rad/s)
OMEGA_43 = 2.0 * np.pi * 814.5e6      # excited hyperfine splitting (rad/s)
OMEGA_D1 = 2.0 * np.pi * 377.107e12   # D1 carrier frequency (rad/s)


class LevelIndex(IntEnum):
    """Zero-based indices of the four levels."""

    G1 = 0
    G2 = 1
    E3 = 2
    E4 = 3


@dataclass(frozen=True)
class AtomicParams:
    """Static parameters of the four-level system.

    Angular frequencies in rad/s, dipole moments in C m, rates in 1/s.
    ``gamma_deph`` is the extra homogeneous dephasing applied to the four
    ground-excited coherences only (Doppler + pressure surrogate, see
    :func:`rbpulse.medium.effective_dephasing`).
    """

    omega21: float
    omega43: float
    delta_p: float
    d31: float
    d32: float
    d41: float
    d42: float
    gamma31: float
    gamma32: float
    gamma41: float
    gamma42: float
    gamma_deph: float = 0.0
    omega_p: float = OMEGA_D1

    def __post_init__(self):
        for name in ("d31", "d32", "d41", "d42"):
            if getattr(self, name) < 0:
                raise ValueError(f"dipole moment {name} must be >= 0")
        for name in ("gamma31", "gamma32", "gamma41", "gamma42", "gamma_deph"):
            if getattr(self, name) < 0:
                raise ValueError(f"rate {name} must be >= 0")

    def replace(self, **changes) -> "AtomicParams":
        return replace(self, **changes)


def default_rb87_params(detuning: float = 0.0, **overrides) -> AtomicParams:
    """Standard 87Rb D1 parameter set for a probe detuned by ``detuning``.

    Dipole matrix elements for y-polarized (pi) coupling are fixed
    fractions of the fine-transition moment: d31 = d_fine/(2*sqrt(3)) and
    d41 = d32 = d42 = sqrt(5)*d_fine/(2*sqrt(3)).  Branching of the decay
    is (1/6, 5/6, 1/2, 1/2) of the total rate for (31, 32, 41, 42).
    Keyword overrides replace individual fields of the returned record.
    """
    root = D_FINE / (2.0 * np.sqrt(3.0))
    params = AtomicParams(
        omega21=OMEGA_21,
        omega43=OMEGA_43,
        delta_p=float(detuning),
        d31=root,
        d32=np.sqrt(5.0) * root,
        d41=np.sqrt(5.0) * root,
        d42=np.sqrt(5.0) * root,
        gamma31=GAMMA_D1 / 6.0,
        gamma32=5.0 * GAMMA_D1 / 6.0,
        gamma41=GAMMA_D1 / 2.0,
        gamma42=GAMMA_D1 / 2.0,
    )
    if overrides:
        params = params.replace(**overrides)
    return params


# (excited, ground) index pairs with their dipole/rate field names
_EG_PAIRS = (
    (LevelIndex.E3, LevelIndex.G1, "d31", "gamma31"),
    (LevelIndex.E3, LevelIndex.G2, "d32", "gamma32"),
    (LevelIndex.E4, LevelIndex.G1, "d41", "gamma41"),
    (LevelIndex.E4, LevelIndex.G2, "d42", "gamma42"),
)


def hamiltonian(params: AtomicParams, field: complex) -> np.ndarray:
    """Rotating-frame Hamiltonian (J) for a local slow-envelope value.

    ``H = hbar*w21|2><2| - hbar*dp|3><3| + hbar*(w43-dp)|4><4|
    - i(d31|3><1| + d41|4><1| + d32|3><2| + d42|4><2|) field + h.c.``

    The returned matrix is exactly Hermitian: the upper coupling block is
    stored as the elementwise conjugate of the lower one.
    """
    H = np.zeros((4, 4), dtype=np.complex128)
    H[1, 1] = hbar * params.omega21
    H[2, 2] = -hbar * params.delta_p
    H[3, 3] = hbar * (params.omega43 - params.delta_p)
    field = complex(field)
    for e, g, dname, _ in _EG_PAIRS:
        coupling = -1j * getattr(params, dname) * field
        H[e, g] = coupling
        H[g, e] = np.conj(coupling)
    return H


def lindblad_rhs(params: AtomicParams, rho: np.ndarray, field: complex) -> np.ndarray:
    """Right-hand side d(rho)/dt of the master equation, in 1/s.

    Coherent part -i/hbar [H, rho]; spontaneous decay with branching
    rates gamma_eg from each excited to each ground state; plus pure
    dephasing at ``gamma_deph`` on the four optical coherences.  Output is
    Hermitian and traceless to rounding.

    Raises ``ValueError`` if ``rho`` is not Hermitian (asymmetry > 1e-9).
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValueError("rho must be a 4x4 matrix")
    asym = np.max(np.abs(rho - rho.conj().T))
    if asym > 1e-9:
        raise ValueError(f"rho is not Hermitian (max asymmetry {asym:.3e})")

    H = hamiltonian(params, field)
    drho = (-1j / hbar) * (H @ rho - rho @ H)

    for e, g, _, gname in _EG_PAIRS:
        rate = getattr(params, gname)
        drho[g, g] += rate * rho[e, e]
        drho[e, :] -= 0.5 * rate * rho[e, :]
        drho[:, e] -= 0.5 * rate * rho[:, e]

    gd = params.gamma_deph
    if gd != 0.0:
        for e, g, _, _ in _EG_PAIRS:
            drho[e, g] -= gd * rho[e, g]
            drho[g, e] -= gd * rho[g, e]
    return drho


def thermal_state(ground_weights: tuple[float, float] = (3.0 / 8.0, 5.0 / 8.0)) -> np.ndarray:
    """Pre-pulse vapor state: ground populations only, no coherence.

    Defaults to Zeeman-degeneracy weighting (3/8, 5/8) of F=1 and F=2;
    the hyperfine splitting is tiny compared to kT, so only the 2F+1
    multiplicities matter.  Pass ``(0.5, 0.5)`` for equal weighting or
    ``(1.0, 0.0)`` to start everything in |1>.
    """
    w1, w2 = ground_weights
    if w1 < 0 or w2 < 0 or not np.isclose(w1 + w2, 1.0, rtol=0, atol=1e-12):
        raise ValueError("ground_weights must be nonnegative and sum to 1")
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = w1
    rho[1, 1] = w2
    return rho
