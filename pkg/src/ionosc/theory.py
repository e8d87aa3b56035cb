"""Analytic neutrino-oscillation model in the plane-wave picture.

Units: every energy-like quantity (``cp``, rest-mass energies ``m c^2``,
``E``) is an ordinary frequency in kHz standing for an angular frequency
``2*pi*nu``. Times are in ms, so a mass eigenstate picks up the phase
``exp(-2j*pi*E*t)``.
"""

from dataclasses import dataclass

import numpy as np

FLAVORS = ("e", "mu", "tau")

UNITARITY_TOL = 1e-12


def flavor_labels(dim):
    return FLAVORS[:dim]


def flavor_index(flavor, dim):
    """Resolve a flavor given by name (``"e"``, ``"mu"``, ``"tau"``) or index."""
    if isinstance(flavor, str):
        labels = flavor_labels(dim)
        if flavor not in labels:
            raise ValueError(f"unknown flavor {flavor!r} for {dim} generations")
        return labels.index(flavor)
    idx = int(flavor)
    if not 0 <= idx < dim:
        raise ValueError(f"flavor index {idx} out of range for {dim} generations")
    return idx


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Unitary flavor-to-mass change of basis; ``entries[alpha, k] = U_{alpha k}``."""

    entries: np.ndarray

    def __post_init__(self):
        U = np.array(self.entries, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] not in (2, 3):
            raise ValueError(f"mixing matrix must be 2x2 or 3x3, got shape {U.shape}")
        err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
        if err >= UNITARITY_TOL:
            raise ValueError(f"mixing matrix is not unitary (max |U^dag U - 1| = {err:.3g})")
        U.setflags(write=False)
        object.__setattr__(self, "entries", U)

    @property
    def dim(self):
        return self.entries.shape[0]

    def conj(self):
        return MixingMatrix(self.entries.conj())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class MassSpectrum:
    """Rest-mass energies ``m_k c^2`` in kHz. Negative values are allowed."""

    masses: tuple

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))

    def __len__(self):
        return len(self.masses)

    def __iter__(self):
        return iter(self.masses)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.masses, dtype=dtype)

    def delta_m2(self):
        """Matrix of squared-mass splittings, ``[k, j] = m_k^2 - m_j^2``."""
        m2 = np.square(self.masses)
        return m2[:, None] - m2[None, :]

    def energies(self, cp):
        return dispersion(cp, np.asarray(self.masses))


def _as_mixing(U):
    return U if isinstance(U, MixingMatrix) else MixingMatrix(U)


def _as_masses(masses, dim):
    m = np.asarray(masses.masses if isinstance(masses, MassSpectrum) else masses, dtype=float)
    if m.shape != (dim,):
        raise ValueError(f"expected {dim} masses, got {m.shape}")
    return m


def tribimaximal():
    """Tribimaximal mixing with the electron row ``(sqrt(2/3), -1/sqrt(3), 0)``.

    The mu and tau rows are a conventional unitary completion; only
    probabilities involving the electron flavor are fixed by the electron row.
    """
    s2, s3, s6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
    return MixingMatrix(
        [
            [s2 / s3, -1 / s3, 0.0],
            [1 / s6, 1 / s3, 1 / s2],
            [1 / s6, 1 / s3, -1 / s2],
        ]
    )


def rotation2(theta):
    """Two-flavor mixing ``[[cos, sin], [-sin, cos]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return MixingMatrix([[c, s], [-s, c]])


def dispersion(cp, mc2):
    """Positive-branch relativistic energy ``sqrt(cp^2 + mc2^2)``."""
    return np.hypot(cp, mc2)


def flavor_amplitudes(U, masses, cp, alpha, t):
    """Flavor amplitudes ``A_beta(t)`` of a state created with flavor ``alpha``.

    Parameters
    ----------
    U : MixingMatrix or array_like
    masses : MassSpectrum or sequence of float
        Rest-mass energies in kHz.
    cp : float
        Kinetic energy scale in kHz.
    alpha : str or int
        Initial flavor.
    t : float or array_like
        Time(s) in ms.

    Returns
    -------
    ndarray
        Shape ``t.shape + (dim,)``; entry ``beta`` is
        ``sum_k U*_{alpha k} exp(-2 pi i E_k t) U_{beta k}``.
    """
    U = _as_mixing(U)
    a = flavor_index(alpha, U.dim)
    E = dispersion(cp, _as_masses(masses, U.dim))
    t = np.asarray(t, dtype=float)
    phases = np.exp(-2j * np.pi * t[..., None] * E)
    return (phases * U.entries[a].conj()) @ U.entries.T


def probability_exact(U, masses, cp, alpha, beta, t):
    """Transition probability ``P(alpha -> beta)`` with exact dispersion."""
    U = _as_mixing(U)
    b = flavor_index(beta, U.dim)
    return np.abs(flavor_amplitudes(U, masses, cp, alpha, t)[..., b]) ** 2


def probability_ultra(U, delta_m2, E, alpha, beta, L_over_c):
    """Ultrarelativistic transition probability as a function of baseline.

    Evaluates the double sum over mass pairs with phase
    ``2 pi * delta_m2[k, j] / (2 E) * L/c``.

    Parameters
    ----------
    delta_m2 : array_like, shape (dim, dim)
        ``m_k^2 - m_j^2`` in kHz^2; a :class:`MassSpectrum` is also accepted.
    E : float
        Beam energy ``c|p|`` in kHz; must be positive.
    L_over_c : float or array_like
        Travel time in ms.
    """
    U = _as_mixing(U)
    if not E > 0:
        raise ValueError("beam energy E must be positive")
    if isinstance(delta_m2, MassSpectrum):
        delta_m2 = delta_m2.delta_m2()
    dm2 = np.asarray(delta_m2, dtype=float)
    if dm2.shape != (U.dim, U.dim):
        raise ValueError(f"delta_m2 must have shape {(U.dim, U.dim)}, got {dm2.shape}")
    a = flavor_index(alpha, U.dim)
    b = flavor_index(beta, U.dim)
    w = U.entries[a].conj() * U.entries[b]  # U*_{ak} U_{bk}
    weights = w[:, None] * w.conj()[None, :]
    L = np.asarray(L_over_c, dtype=float)
    phase = np.exp(-2j * np.pi * L[..., None, None] * dm2 / (2.0 * E))
    P = np.sum(weights * phase, axis=(-2, -1))
    return P.real
