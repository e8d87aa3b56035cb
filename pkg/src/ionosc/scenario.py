"""Prepare a flavor state on the ion register, evolve it, read out flavors.

Flavor read-out comes in two flavors of its own:

``"component"``
    ``P_beta = sum_s |sum_k U_{beta k} c_{k,s}|^2`` with ``c_{k,s}`` the
    amplitude on the spinor component ``s`` of mass block ``k``. This is the
    plain projector onto the flavor subspaces of the register and shows the
    fast positive/negative-energy interference.
``"energy"``
    The same sum after rotating each block onto its exact energy eigenspinors
    at the sector momentum, so positive- and negative-energy parts are
    counted separately. For positive-energy preparations this is the
    plane-wave flavor probability of the analytic theory.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import encoding
from .dirac1d import gaussian_packet
from .engine import FockConfig, converge_fock, evolve_sector, packet_evolve
from .operators import fix_phase
from .theory import MixingMatrix, flavor_index, flavor_labels, probability_exact, tribimaximal

SPINOR_MODES = ("symmetric", "exact", "exact-negative", "superposed")
OBSERVABLES = ("auto", "component", "energy")
SCHEMES = ("A", "B", "two-gen")
RECORD_TOL = 1e-10
NORM_DRIFT_TOL = 1e-8


class NumericalInvariantError(RuntimeError):
    """A run violated norm or probability bookkeeping."""


@dataclass(frozen=True)
class MomentumEigenstate:
    p: float


@dataclass(frozen=True)
class GaussianMomentum:
    """Gaussian packet; ``sigma`` is the std of the momentum distribution."""

    p0: float
    sigma: float
    n_points: int = 129
    half_width: float = 5.0

    def grid(self):
        return gaussian_packet(self.p0, self.sigma, self.n_points, self.half_width)


_PARAM_TYPES = {"A": encoding.SchemeAParams, "B": encoding.SchemeBParams, "two-gen": encoding.TwoGenParams}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One flavor-oscillation experiment.

    Give either ``masses`` (rest-mass energies, kHz) or scheme ``params``.
    ``spinor`` is one of :data:`SPINOR_MODES` or a custom ``(upper, lower)``
    pair shared by all mass blocks. ``engine`` is ``"sector"`` or a
    :class:`FockConfig`; the Fock engine needs a :class:`GaussianMomentum`,
    whose width fixes the phonon ground-state size.
    """

    scheme: str = "A"
    masses: tuple = None
    params: object = None
    c: float = 1.0
    mixing: MixingMatrix = field(default_factory=tribimaximal)
    alpha: object = "e"
    spinor: object = "symmetric"
    momentum: object = field(default_factory=lambda: MomentumEigenstate(40.0))
    engine: object = "sector"
    times: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 10.0, 1001))
    observable: str = "auto"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if (self.masses is None) == (self.params is None):
            raise ValueError("give exactly one of masses or params")
        if self.params is not None and not isinstance(self.params, _PARAM_TYPES[self.scheme]):
            raise ValueError(f"params of type {type(self.params).__name__} do not fit scheme {self.scheme}")
        if not isinstance(self.mixing, MixingMatrix):
            object.__setattr__(self, "mixing", MixingMatrix(self.mixing))
        n_gen = 2 if self.scheme == "two-gen" else 3
        if self.mixing.dim != n_gen:
            raise ValueError(f"mixing matrix is {self.mixing.dim}x{self.mixing.dim} but scheme {self.scheme} has {n_gen} generations")
        if self.masses is not None:
            object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
            if len(self.masses) != n_gen:
                raise ValueError(f"scheme {self.scheme} needs {n_gen} masses, got {len(self.masses)}")
        flavor_index(self.alpha, n_gen)
        if isinstance(self.spinor, str):
            if self.spinor not in SPINOR_MODES:
                raise ValueError(f"spinor must be one of {SPINOR_MODES} or (upper, lower)")
        else:
            s = np.asarray(self.spinor, dtype=complex)
            if s.shape != (2,) or abs(np.linalg.norm(s) - 1.0) > RECORD_TOL:
                raise ValueError("custom spinor must be a normalized (upper, lower) pair")
            object.__setattr__(self, "spinor", s)
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}")
        if not isinstance(self.momentum, (MomentumEigenstate, GaussianMomentum)):
            raise ValueError("momentum must be a MomentumEigenstate or GaussianMomentum")
        if isinstance(self.engine, FockConfig):
            if not isinstance(self.momentum, GaussianMomentum):
                raise ValueError("the Fock engine needs a Gaussian (coherent-state) momentum spec")
            if isinstance(self.spinor, str) and self.spinor != "symmetric":
                raise ValueError("the Fock engine needs a momentum-independent spinor (symmetric or custom)")
            if self.observable_mode == "energy":
                raise ValueError("energy-resolved read-out is only defined on the sector engine")
            sigma = self.momentum.sigma
            if self.engine.delta is not None and not np.isclose(self.engine.momentum_sigma, sigma, rtol=1e-12):
                raise ValueError("Fock delta is inconsistent with the packet width (need sigma = 1/(2 delta))")
        elif self.engine != "sector":
            raise ValueError("engine must be 'sector' or a FockConfig")
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a non-empty 1-D grid")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def n_generations(self):
        return self.mixing.dim

    @property
    def flavors(self):
        return flavor_labels(self.n_generations)

    @cached_property
    def resolved_params(self):
        if self.params is not None:
            return self.params
        return encoding.params_for_masses(self.scheme, self.masses, c=self.c)

    @cached_property
    def hamiltonian(self):
        """``(HamiltonianPair, NeutrinoEncoding)`` for this config."""
        return encoding.build(self.resolved_params)

    @cached_property
    def mass_spectrum(self):
        return encoding.mass_spectrum_of(*self.hamiltonian)

    @property
    def observable_mode(self):
        if self.observable != "auto":
            return self.observable
        return "energy" if isinstance(self.spinor, str) and self.spinor == "exact" else "component"

    @property
    def central_momentum(self):
        m = self.momentum
        return m.p if isinstance(m, MomentumEigenstate) else m.p0

    @property
    def effective_speed(self):
        return self.resolved_params.c

    def fock_config(self):
        return replace(self.engine, delta=1.0 / (2.0 * self.momentum.sigma), p0=self.momentum.p0)


def _block_h(pair, enc, k, p):
    idx = enc.block(k)
    return pair.h(p)[np.ix_(idx, idx)] - pair.constant_shift * np.eye(2)


def energy_bases(pair, enc, p):
    """Per-block 2x2 matrices whose columns are the (positive, negative) energy spinors."""
    bases = np.empty((enc.n_generations, 2, 2), dtype=complex)
    for k in range(enc.n_generations):
        hk = _block_h(pair, enc, k, p)
        w, V = np.linalg.eigh(hk)
        if w[1] - w[0] <= 1e-14 * max(1.0, np.abs(hk).max()):
            raise ValueError("massless zero-momentum state has no unique energy spinor")
        bases[k, :, 0] = fix_phase(V[:, 1])
        bases[k, :, 1] = fix_phase(V[:, 0])
    return bases


def block_spinors(pair, enc, p, spinor):
    """Spinor placed on each mass block for the given preparation mode."""
    n = enc.n_generations
    if not isinstance(spinor, str):
        return np.tile(np.asarray(spinor, dtype=complex), (n, 1))
    if spinor == "symmetric":
        # ultrarelativistic positive-energy spinor: top eigenvector of the kinetic block
        out = np.empty((n, 2), dtype=complex)
        for k in range(n):
            idx = enc.block(k)
            _, V = np.linalg.eigh(pair.K[np.ix_(idx, idx)])
            out[k] = fix_phase(V[:, 1])
        return out
    bases = energy_bases(pair, enc, p)
    if spinor == "exact":
        return bases[:, :, 0]
    if spinor == "exact-negative":
        return bases[:, :, 1]
    if spinor == "superposed":
        return (bases[:, :, 0] + bases[:, :, 1]) / np.sqrt(2.0)
    raise ValueError(f"unknown spinor mode {spinor!r}")


def flavor_state(enc, U, alpha, spinors):
    """Register state ``sum_k U*_{alpha k} |nu_k; spinor_k>``."""
    U = U if isinstance(U, MixingMatrix) else MixingMatrix(U)
    a = flavor_index(alpha, U.dim)
    if U.dim != enc.n_generations:
        raise ValueError("mixing dimension does not match the encoding")
    psi = np.zeros(enc.dim, dtype=complex)
    for k in range(enc.n_generations):
        psi[enc.block(k)] = U.entries[a, k].conj() * np.asarray(spinors[k])
    return psi


def prepare_flavor_state(config, p=None):
    """Initial state for ``config``.

    Sector engine: the register state at momentum ``p`` (default: the
    central momentum). Fock engine: register state times coherent phonon state.
    """
    pair, enc = config.hamiltonian
    p = config.central_momentum if p is None else p
    psi = flavor_state(enc, config.mixing, config.alpha, block_spinors(pair, enc, p, config.spinor))
    if isinstance(config.engine, FockConfig):
        cfg = config.fock_config()
        return np.kron(psi, cfg.phonon_state())
    return psi


def measure_flavor(states, U, enc, bases=None, n_phonon=1):
    """Flavor probabilities and leakage of register (or register x phonon) states.

    Parameters
    ----------
    states : array_like, shape (..., enc.dim * n_phonon)
        Qubit-major vectors; the phonon index is summed over.
    U : MixingMatrix
    enc : NeutrinoEncoding
    bases : array_like, shape (n_generations, 2, 2), optional
        Per-block spinor bases to rotate into before projecting
        (see :func:`energy_bases`). Identity when omitted.

    Returns
    -------
    P : ndarray, shape (..., n_flavors)
    leakage : ndarray, shape (...)
        Population outside the encoded subspace.
    """
    U = U if isinstance(U, MixingMatrix) else MixingMatrix(U)
    states = np.asarray(states, dtype=complex)
    if states.shape[-1] != enc.dim * n_phonon:
        raise ValueError(f"state dimension {states.shape[-1]} does not match {enc.dim} x {n_phonon}")
    if U.dim != enc.n_generations:
        raise ValueError("mixing dimension does not match the encoding")
    reg = states.reshape(states.shape[:-1] + (enc.dim, n_phonon))
    idx = np.array(enc.basis_map, dtype=int)  # (k, s)
    c = reg[..., idx, :]  # (..., k, s, n)
    if bases is not None:
        c = np.einsum("kse,...ksn->...ken", np.asarray(bases).conj(), c)
    amp = np.einsum("bk,...ksn->...bsn", U.entries, c)
    P = np.sum(np.abs(amp) ** 2, axis=(-2, -1))
    left = np.array(enc.leftover, dtype=int)
    leakage = np.sum(np.abs(reg[..., left, :]) ** 2, axis=(-2, -1)) if left.size else np.zeros(states.shape[:-1])
    return P, leakage


@dataclass(frozen=True, eq=False)
class OscillationRecord:
    """Per-time flavor probabilities with norm and leakage bookkeeping.

    ``norm`` is the total probability ``||psi||^2``.
    """

    times: np.ndarray
    P: np.ndarray
    leakage: np.ndarray
    norm: np.ndarray
    flavors: tuple
    config: ExperimentConfig = None
    diagnostics: dict = field(default_factory=dict)

    def check_invariants(self, tol=RECORD_TOL):
        """Raise :class:`NumericalInvariantError` on broken bookkeeping."""
        drift = np.max(np.abs(self.P.sum(axis=1) + self.leakage - self.norm))
        if drift > tol:
            raise NumericalInvariantError(f"sum P + leakage differs from norm by {drift:.3g}")
        if self.P.min() < -1e-12 or self.P.max() > 1 + 1e-12:
            raise NumericalInvariantError("flavor probability outside [0, 1]")
        norm_drift = np.max(np.abs(self.norm - 1.0))
        if norm_drift > NORM_DRIFT_TOL:
            raise NumericalInvariantError(f"norm drifted by {norm_drift:.3g}")


def _readout(config, p=None):
    """Observable ``trajectory -> (n_t, n_flavors + 2)`` of [P..., leakage, norm]."""
    pair, enc = config.hamiltonian
    bases = energy_bases(pair, enc, p) if config.observable_mode == "energy" else None

    def observe(traj):
        P, leak = measure_flavor(traj.states, config.mixing, enc, bases, n_phonon=traj.n_phonon)
        norm = np.sum(np.abs(traj.states) ** 2, axis=-1)
        return np.column_stack([P, leak, norm])

    return observe


def run(config, threads=None):
    """Prepare, evolve and read out ``config``; returns an :class:`OscillationRecord`."""
    pair, enc = config.hamiltonian
    times = config.times
    diagnostics = {"observable": config.observable_mode}
    if isinstance(config.engine, FockConfig):
        cfg = config.fock_config()
        psi = flavor_state(enc, config.mixing, config.alpha, block_spinors(pair, enc, None, config.spinor))
        fock = converge_fock(pair, psi, cfg, times, _readout(config))
        data = _readout(config)(fock.trajectory)
        diagnostics.update(engine="fock", n_cut=fock.n_cut, delta=cfg.delta,
                           cutoff_history=[[n, ch] for n, ch in fock.history])
    elif isinstance(config.momentum, MomentumEigenstate):
        p = config.momentum.p
        traj = evolve_sector(pair, p, prepare_flavor_state(config, p), times)
        data = _readout(config, p)(traj)
        diagnostics.update(engine="sector", grid_size=1)
    else:
        grid = config.momentum.grid()
        packet = packet_evolve(pair, grid, lambda p: prepare_flavor_state(config, p), times, threads=threads)
        data = packet.combine(lambda traj: _readout(config, traj.p)(traj))
        diagnostics.update(engine="sector", grid_size=len(grid))
    n_f = config.n_generations
    record = OscillationRecord(
        times=np.array(times),
        P=data[:, :n_f],
        leakage=data[:, n_f],
        norm=data[:, n_f + 1],
        flavors=config.flavors,
        config=config,
        diagnostics=diagnostics,
    )
    record.check_invariants()
    return record


def theory_probabilities(config, times=None):
    """Analytic ``P(alpha -> beta)`` at the central momentum, shape (n_t, n_flavors)."""
    times = config.times if times is None else np.asarray(times, dtype=float)
    cp = config.effective_speed * config.central_momentum
    masses = config.mass_spectrum
    return np.column_stack(
        [probability_exact(config.mixing, masses, cp, config.alpha, b, times) for b in range(config.n_generations)]
    )


def deviation_metrics(P, reference, flavors):
    diff = np.abs(np.asarray(P) - np.asarray(reference))
    per = {
        f: {"max_abs_dev": float(diff[:, i].max(initial=0.0)), "rms_dev": float(np.sqrt(np.mean(diff[:, i] ** 2)))}
        for i, f in enumerate(flavors)
    }
    return {
        "max_abs_dev": float(diff.max(initial=0.0)),
        "rms_dev": float(np.sqrt(np.mean(diff**2))),
        "per_flavor": per,
    }


def compare_to_theory(record, config):
    """Deviation of ``record.P`` from the exact plane-wave theory."""
    return deviation_metrics(record.P, theory_probabilities(config, record.times), config.flavors)
