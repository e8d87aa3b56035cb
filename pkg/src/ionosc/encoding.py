"""Trapped-ion Hamiltonians for neutrino oscillations and their mass encodings.

Two three-ion constructions are provided:

* scheme A: Dirac term on the middle ion plus sigma_z sigma_z couplings on
  ion pairs (1, 2) and (2, 3); states live in the (|g>, |e>) basis with
  ``sigma_z|e> = +|e>``.
* scheme B: all-to-all sigma_x sigma_x couplings with extra single-ion
  sigma_x drives; states live in the x basis (|0>, |1>) with
  ``sigma_x|1> = +|1>`` and the Dirac kinetic term is a sigma_y on ion 1.

plus a two-ion, two-generation reduction of scheme A.

Every construction returns a :class:`HamiltonianPair` ``(K, M)`` with
``H(p) = p K + M`` and a :class:`NeutrinoEncoding` naming which basis states
carry the (upper, lower) spinor components of each mass eigenstate.
"""

from dataclasses import dataclass

import numpy as np

from .operators import ION_SX, ION_SZ, SIGMA_Y, XBASIS_SX, basis_index, embed, is_hermitian, kron
from .theory import MassSpectrum

BLOCK_TOL = 1e-12


@dataclass(frozen=True)
class NeutrinoEncoding:
    """Map from (mass index, spinor component) to computational basis indices."""

    n_qubits: int
    basis_map: tuple  # ((upper, lower) for each mass eigenstate)
    leftover: tuple

    def __post_init__(self):
        bmap = tuple((int(u), int(l)) for u, l in self.basis_map)
        left = tuple(sorted(int(i) for i in self.leftover))
        used = [i for pair in bmap for i in pair]
        dim = 2**self.n_qubits
        if len(set(used)) != len(used):
            raise ValueError("basis_map must be injective")
        if sorted(used + list(left)) != list(range(dim)):
            raise ValueError("basis_map and leftover must partition the register basis")
        object.__setattr__(self, "basis_map", bmap)
        object.__setattr__(self, "leftover", left)

    @classmethod
    def from_labels(cls, labels, zero="g"):
        """Build from ``[("ggg", "geg"), ...]`` style labels; leftovers are inferred."""
        n = len(labels[0][0])
        bmap = tuple((basis_index(u, zero), basis_index(l, zero)) for u, l in labels)
        used = {i for pair in bmap for i in pair}
        return cls(n, bmap, tuple(i for i in range(2**n) if i not in used))

    @property
    def n_generations(self):
        return len(self.basis_map)

    @property
    def dim(self):
        return 2**self.n_qubits

    @property
    def encoded(self):
        """All encoded indices, ordered (k=0 upper, k=0 lower, k=1 upper, ...)."""
        return np.array([i for pair in self.basis_map for i in pair], dtype=int)

    def block(self, k):
        return np.array(self.basis_map[k], dtype=int)


@dataclass(frozen=True, eq=False)
class HamiltonianPair:
    """Kinetic generator ``K`` and momentum-independent part ``M``.

    ``constant_shift`` is the identity offset that ``M`` carries on the
    encoded subspace (scheme B's ``-J1``); it is bookkeeping, already included
    in ``M``, so ``H(p) = p K + M``.
    """

    K: np.ndarray
    M: np.ndarray
    constant_shift: float = 0.0

    def __post_init__(self):
        K = np.array(self.K, dtype=complex)
        M = np.array(self.M, dtype=complex)
        if K.shape != M.shape or not (is_hermitian(K, 1e-14) and is_hermitian(M, 1e-14)):
            raise ValueError("K and M must be Hermitian matrices of equal shape")
        K.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "M", M)

    @property
    def dim(self):
        return self.K.shape[0]

    def h(self, p):
        return p * self.K + self.M


@dataclass(frozen=True)
class SchemeAParams:
    Omega: float
    Omega1: float
    Omega2: float
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("effective speed c must be positive")

    def masses(self):
        O, O1, O2 = self.Omega, self.Omega1, self.Omega2
        return MassSpectrum((O + O1 + O2, O + O1 - O2, O - O1 + O2))


@dataclass(frozen=True)
class SchemeBParams:
    J: float
    J1: float
    J2: float
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("effective speed c must be positive")

    def masses(self):
        J, J1, J2 = self.J, self.J1, self.J2
        return MassSpectrum((J + J1 + J2, J + J1 - J2, J - J1 + J2))


@dataclass(frozen=True)
class TwoGenParams:
    Omega: float
    Omega1: float
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("effective speed c must be positive")

    def masses(self):
        return MassSpectrum((self.Omega + self.Omega1, self.Omega - self.Omega1))


SCHEME_A_ENCODING = NeutrinoEncoding.from_labels([("ggg", "geg"), ("gge", "gee"), ("egg", "eeg")])
SCHEME_B_ENCODING = NeutrinoEncoding.from_labels([("000", "100"), ("001", "101"), ("010", "110")])
TWO_GEN_ENCODING = NeutrinoEncoding.from_labels([("gg", "eg"), ("ge", "ee")])


def build_scheme_a(params):
    """sigma_z sigma_z scheme on three ions.

    ``K = c (1 x sx x 1)`` and
    ``M = -Omega (1 x sz x 1) + Omega1 (sz x sz x 1) + Omega2 (1 x sz x sz)``.
    """
    n = 3
    K = params.c * embed(ION_SX, 1, n)
    M = (
        -params.Omega * embed(ION_SZ, 1, n)
        + params.Omega1 * kron(ION_SZ, ION_SZ, np.eye(2))
        + params.Omega2 * kron(np.eye(2), ION_SZ, ION_SZ)
    )
    return HamiltonianPair(K, M), SCHEME_A_ENCODING


def build_scheme_b(params):
    """sigma_x sigma_x scheme on three ions, written in the x basis.

    The kinetic term ``c sigma_y`` sits on ion 1, the slot that separates the
    upper and lower spinor components of the encoded states. ``M`` is the
    full coupling plus single-ion drive operator; on every encoded block it
    acts as ``m_k sigma_z - J1``.
    """
    n = 3
    sx = [embed(XBASIS_SX, i, n) for i in range(n)]
    K = params.c * embed(SIGMA_Y, 0, n)
    M = (
        params.J1 * (sx[0] @ sx[1] + sx[1] @ sx[2])
        + params.J2 * sx[0] @ sx[2]
        + params.J1 * sx[1]
        + params.J1 * sx[2]
        - params.J * sx[0]
    )
    return HamiltonianPair(K, M, constant_shift=-params.J1), SCHEME_B_ENCODING


def build_two_generation(c, Omega, Omega1):
    """Two ions: spinor on ion 1, mass label on ion 2.

    ``K = c (sx x 1)``, ``M = -Omega (sz x 1) + Omega1 (sz x sz)``, giving
    masses ``Omega + Omega1`` and ``Omega - Omega1``.
    """
    if not c > 0:
        raise ValueError("effective speed c must be positive")
    K = c * embed(ION_SX, 0, 2)
    M = -Omega * embed(ION_SZ, 0, 2) + Omega1 * kron(ION_SZ, ION_SZ)
    return HamiltonianPair(K, M), TWO_GEN_ENCODING


def build(params):
    """Dispatch on the parameter type."""
    if isinstance(params, SchemeAParams):
        return build_scheme_a(params)
    if isinstance(params, SchemeBParams):
        return build_scheme_b(params)
    if isinstance(params, TwoGenParams):
        return build_two_generation(params.c, params.Omega, params.Omega1)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def check_block_closure(pair, enc, tol=BLOCK_TOL):
    """Raise if ``K`` or ``M`` couple different mass blocks or the leftover space."""
    groups = [enc.block(k) for k in range(enc.n_generations)]
    if enc.leftover:
        groups.append(np.array(enc.leftover, dtype=int))
    label = np.empty(enc.dim, dtype=int)
    for g, idx in enumerate(groups):
        label[idx] = g
    outside = label[:, None] != label[None, :]
    for op in (pair.K, pair.M):
        if op.shape != (enc.dim, enc.dim):
            raise ValueError("encoding mismatch: operator dimension differs from register")
        if np.max(np.abs(op[outside]), initial=0.0) > tol:
            raise ValueError("encoding mismatch: operator couples distinct blocks")


def mass_spectrum_of(pair, enc):
    """Effective rest-mass energies of each encoded mass block.

    Half the spread of the ``M`` eigenvalues inside block ``k``, signed by
    the upper-component diagonal entry after removing ``constant_shift``.
    """
    check_block_closure(pair, enc)
    masses = []
    for k in range(enc.n_generations):
        idx = enc.block(k)
        block = pair.M[np.ix_(idx, idx)] - pair.constant_shift * np.eye(2)
        w = np.linalg.eigvalsh(block)
        half_spread = 0.5 * (w[-1] - w[0])
        upper = block[0, 0].real
        masses.append(-half_spread if upper < 0 else half_spread)
    return MassSpectrum(masses)


def params_for_masses(scheme, target, c=1.0):
    """Drive parameters that realize the target rest-mass energies.

    ``scheme`` is ``"A"``, ``"B"`` or ``"two-gen"``.
    """
    m = np.asarray(target.masses if isinstance(target, MassSpectrum) else target, dtype=float)
    if scheme in ("A", "B"):
        if m.shape != (3,):
            raise ValueError(f"scheme {scheme} needs 3 masses, got {m.size}")
        strength, first, second = (float(x) for x in ((m[1] + m[2]) / 2, (m[0] - m[2]) / 2, (m[0] - m[1]) / 2))
        if scheme == "A":
            return SchemeAParams(strength, first, second, c=c)
        return SchemeBParams(strength, first, second, c=c)
    if scheme == "two-gen":
        if m.shape != (2,):
            raise ValueError(f"two-generation scheme needs 2 masses, got {m.size}")
        return TwoGenParams(float(m[0] + m[1]) / 2, float(m[0] - m[1]) / 2, c=c)
    raise ValueError(f"unknown scheme {scheme!r}")
