"""Free 1+1D Dirac particle at fixed momentum, plus Gaussian momentum packets."""

from dataclasses import dataclass, field

import numpy as np

from .operators import SIGMA_X, SIGMA_Z, fix_phase
from .theory import dispersion


@dataclass(frozen=True)
class DiracParams:
    """Effective speed ``c`` and rest-mass energy ``mc2`` (kHz)."""

    c: float = 1.0
    mc2: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("effective speed c must be positive")


def dirac_h(p, params):
    """2x2 Dirac Hamiltonian ``c p sigma_x + mc2 sigma_z`` in the (upper, lower) basis."""
    return params.c * p * SIGMA_X + params.mc2 * SIGMA_Z


def energy_spinor(p, params, branch="positive"):
    """Energy eigenvalue and normalized eigenspinor of :func:`dirac_h`.

    The spinor's upper component is real and non-negative (lower component
    real positive when the upper one vanishes).

    Raises
    ------
    ValueError
        For the degenerate massless, zero-momentum point.
    """
    cp = params.c * p
    if cp == 0 and params.mc2 == 0:
        raise ValueError("massless zero-momentum state has no unique energy spinor")
    half = 0.5 * np.arctan2(cp, params.mc2)
    E = dispersion(cp, params.mc2)
    if branch == "positive":
        u = np.array([np.cos(half), np.sin(half)], dtype=complex)
    elif branch == "negative":
        E = -E
        u = np.array([-np.sin(half), np.cos(half)], dtype=complex)
    else:
        raise ValueError(f"branch must be 'positive' or 'negative', got {branch!r}")
    return E, fix_phase(u)


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Discrete momentum wavefunction with ``sum |amplitudes|^2 = 1``."""

    points: np.ndarray
    amplitudes: np.ndarray
    spacing: float = field(default=float("nan"))

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        if pts.size == 0 or pts.shape != amp.shape:
            raise ValueError("momentum grid needs matching, non-empty points and amplitudes")
        norm = np.sum(np.abs(amp) ** 2)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"grid amplitudes not normalized (sum |psi|^2 = {norm!r})")
        pts.setflags(write=False)
        amp.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "amplitudes", amp)

    def __len__(self):
        return self.points.size

    @property
    def weights(self):
        return np.abs(self.amplitudes) ** 2

    def mean(self):
        return float(np.sum(self.points * self.weights))

    @classmethod
    def single(cls, p):
        return cls([p], [1.0])


def gaussian_packet(p0, sigma, n_points=129, half_width=5.0, points=None):
    """Gaussian momentum packet centred on ``p0``.

    ``sigma`` is the standard deviation of the momentum probability density,
    i.e. amplitudes go as ``exp(-(p - p0)^2 / (4 sigma^2))``. The default grid
    has ``n_points`` equally spaced values over ``p0 +/- half_width * sigma``;
    pass ``points`` to use an explicit grid instead.
    """
    if not sigma > 0:
        raise ValueError("packet width sigma must be positive")
    if points is None:
        if n_points < 1:
            raise ValueError("n_points must be positive")
        pts = np.linspace(p0 - half_width * sigma, p0 + half_width * sigma, n_points)
        spacing = pts[1] - pts[0] if n_points > 1 else float("nan")
    else:
        pts = np.sort(np.asarray(points, dtype=float).ravel())
        steps = np.diff(pts)
        spacing = float(steps[0]) if steps.size and np.allclose(steps, steps[0]) else float("nan")
    if pts.size == 0 or pts[0] > p0 - 4 * sigma or pts[-1] < p0 + 4 * sigma:
        raise ValueError("momentum grid must cover at least p0 +/- 4 sigma")
    amp = np.exp(-((pts - p0) ** 2) / (4.0 * sigma**2))
    amp = amp / np.linalg.norm(amp)
    return MomentumGrid(pts, amp, spacing)
