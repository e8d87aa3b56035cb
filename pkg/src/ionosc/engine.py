"""Time evolution under ``H(p) = p K + M``.

Two routes are available. The momentum-sector route evolves the qubit
register at fixed momentum (the ion Hamiltonians commute with the phonon
momentum, so momentum sectors never mix). The Fock route keeps the phonon
mode explicitly on a truncated number basis and serves as an independent
check of the sector route.

Both use a Hermitian eigendecomposition computed once per Hamiltonian, so any
time grid is evaluated exactly: ``psi(t) = V exp(-2 pi i w t) V^dag psi0``
with ``t`` in ms and eigenvalues ``w`` in kHz.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.csgraph import connected_components

from .operators import coherent_state, fock_momentum, is_hermitian

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10
THREADS_ENV = "IONOSC_THREADS"


class ConvergenceError(RuntimeError):
    """Fock cutoff extension did not reach the requested tolerance."""


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on a time grid; ``states[i]`` is the vector at ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    p: float = None
    n_phonon: int = 1

    @property
    def norms(self):
        return np.linalg.norm(self.states, axis=-1)


class SpectralPropagator:
    """Exact propagator of a Hermitian matrix.

    The matrix is split into its decoupled blocks (connected components of
    the nonzero pattern) and each block is diagonalized separately.
    """

    def __init__(self, H):
        H = np.asarray(H, dtype=complex)
        if not is_hermitian(H, HERMITIAN_TOL):
            raise ValueError("Hamiltonian is not Hermitian")
        self.dim = H.shape[0]
        n_blocks, labels = connected_components(np.abs(H) > 0, directed=False)
        self.blocks = []
        for b in range(n_blocks):
            idx = np.flatnonzero(labels == b)
            w, V = np.linalg.eigh(H[np.ix_(idx, idx)])
            self.blocks.append((idx, w, V))

    @property
    def eigenvalues(self):
        return np.sort(np.concatenate([w for _, w, _ in self.blocks]))

    def propagate(self, psi0, times):
        psi0 = np.asarray(psi0, dtype=complex)
        if psi0.shape != (self.dim,):
            raise ValueError(f"state has shape {psi0.shape}, expected ({self.dim},)")
        t = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty((t.size, self.dim), dtype=complex)
        for idx, w, V in self.blocks:
            coeff = V.conj().T @ psi0[idx]
            phases = np.exp(-2j * np.pi * np.outer(t, w))
            out[:, idx] = (phases * coeff) @ V.T
        return out


def _check_normalized(psi0):
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"initial state is not normalized (norm {norm!r})")


def evolve(H, psi0, times, p=None, n_phonon=1):
    """Evolve ``psi0`` under a Hermitian ``H`` over ``times`` (ms)."""
    _check_normalized(psi0)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    states = SpectralPropagator(H).propagate(psi0, t)
    return Trajectory(t, states, p=p, n_phonon=n_phonon)


def evolve_sector(pair, p, psi0, times):
    """Evolve a qubit-register state at fixed phonon momentum ``p``."""
    return evolve(pair.h(p), psi0, times, p=p)


@dataclass(frozen=True)
class FockConfig:
    """Truncated phonon mode.

    ``delta`` is the ground-state width, so the vacuum has momentum spread
    ``1 / (2 delta)``; ``None`` leaves it to be set from a packet width.
    ``p0`` selects the initial phonon state: ``None`` for the Fock vacuum,
    otherwise the coherent state displaced to mean momentum ``p0``. With
    ``auto_extend`` the cutoff is doubled until the observable changes by
    less than ``tol``.
    """

    n_cut: int = 64
    delta: float = None
    p0: float = None
    auto_extend: bool = True
    tol: float = 1e-8
    max_n_cut: int = 4096

    def __post_init__(self):
        if self.n_cut < 2:
            raise ValueError("n_cut must be at least 2")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")

    @property
    def momentum_sigma(self):
        return 1.0 / (2.0 * self.delta)

    def phonon_state(self, n_cut=None):
        if self.delta is None:
            raise ValueError("FockConfig.delta is unset")
        n_cut = self.n_cut if n_cut is None else n_cut
        alpha = 0.0 if self.p0 is None else 1j * self.p0 * self.delta
        return coherent_state(alpha, n_cut)


def build_fock_h(pair, cfg):
    """Qubit-phonon Hamiltonian ``K x p + M x 1`` on the truncated Fock space."""
    if cfg.delta is None:
        raise ValueError("FockConfig.delta is unset")
    p_op = fock_momentum(cfg.n_cut, cfg.delta)
    H = np.kron(pair.K, p_op) + np.kron(pair.M, np.eye(cfg.n_cut))
    # momentum conservation, probed on random vectors to stay O(dim^2)
    P_full = lambda v: (v.reshape(pair.dim, cfg.n_cut) @ p_op.T).ravel()
    rng = np.random.default_rng(0)
    for _ in range(2):
        v = rng.standard_normal(H.shape[0]) + 1j * rng.standard_normal(H.shape[0])
        v /= np.linalg.norm(v)
        comm = H @ P_full(v) - P_full(H @ v)
        if np.linalg.norm(comm) > 1e-10 * max(1.0, np.abs(H).max()):
            raise ValueError("Fock Hamiltonian does not conserve phonon momentum")
    return H


def fock_initial_state(qubit_state, cfg, n_cut=None):
    return np.kron(np.asarray(qubit_state, dtype=complex), cfg.phonon_state(n_cut))


def evolve_fock(H, psi0, times, n_phonon=None):
    """Evolve a qubit-phonon state; ``n_phonon`` is recorded for later tracing."""
    H = np.asarray(H)
    psi0 = np.asarray(psi0)
    if psi0.shape != (H.shape[0],):
        raise ValueError(f"state dimension {psi0.shape} does not match Hamiltonian {H.shape}")
    return evolve(H, psi0, times, n_phonon=n_phonon or 1)


@dataclass(frozen=True, eq=False)
class FockRun:
    trajectory: Trajectory
    n_cut: int
    history: list = field(default_factory=list)  # (n_cut, max change vs previous cutoff)


def converge_fock(pair, qubit_state, cfg, times, observable):
    """Fock evolution with cutoff doubling until ``observable`` settles.

    ``observable`` maps a :class:`Trajectory` to an array. Returns the run at
    the larger of the last two cutoffs.
    """

    def run(n_cut):
        local = replace(cfg, n_cut=n_cut)
        H = build_fock_h(pair, local)
        traj = evolve_fock(H, fock_initial_state(qubit_state, local), times, n_phonon=n_cut)
        return traj, np.asarray(observable(traj))

    n = cfg.n_cut
    traj, obs = run(n)
    if not cfg.auto_extend:
        return FockRun(traj, n, [(n, float("nan"))])
    history = [(n, float("nan"))]
    while True:
        n2 = 2 * n
        if n2 > cfg.max_n_cut:
            raise ConvergenceError(f"Fock cutoff exceeded {cfg.max_n_cut} before reaching tol {cfg.tol}")
        traj2, obs2 = run(n2)
        change = float(np.max(np.abs(obs2 - obs)))
        history.append((n2, change))
        if change < cfg.tol:
            return FockRun(traj2, n2, history)
        n, traj, obs = n2, traj2, obs2


def resolve_threads(threads=None):
    """Worker count from the argument or ``IONOSC_THREADS``; 0 means one per CPU."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "0") or 0)
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class PacketEvolution:
    """Independent momentum-sector trajectories of a packet."""

    weights: np.ndarray
    trajectories: list

    def combine(self, observable):
        """Weighted sum of a per-sector observable, accumulated in grid order."""
        total = None
        for w, traj in zip(self.weights, self.trajectories):
            term = w * np.asarray(observable(traj))
            total = term if total is None else total + term
        return total


def packet_evolve(pair, grid, initial, times, threads=None):
    """Evolve every momentum point of ``grid`` independently.

    ``initial`` is either a qubit-register state shared by all sectors or a
    callable ``p -> state``.
    """
    if len(grid) == 0:
        raise ValueError("empty momentum grid")
    init = initial if callable(initial) else (lambda p: initial)

    def one(p):
        return evolve_sector(pair, p, init(p), times)

    n_workers = min(resolve_threads(threads), len(grid))
    if n_workers <= 1:
        trajectories = [one(p) for p in grid.points]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            trajectories = list(pool.map(one, grid.points))
    return PacketEvolution(grid.weights, trajectories)
