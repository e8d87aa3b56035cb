"""Dense operator helpers: Pauli matrices, tensor embedding and truncated Fock ladders.

Qubit registers use the big-endian convention of ``np.kron``: the first tensor
slot is the most significant bit of the computational basis index.
"""

from functools import reduce

import numpy as np
from scipy.special import gammaln

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Ion-level operators on the (|g>, |e>) = (bit 0, bit 1) basis, with sigma_z|e> = +|e>.
ION_SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
ION_SX = SIGMA_X

# x-basis register (|0>, |1>) = (bit 0, bit 1): sigma_x is diagonal with sigma_x|1> = +|1>.
XBASIS_SX = np.array([[-1, 0], [0, 1]], dtype=complex)


def kron(*ops):
    """Tensor product of the operators, first argument in the leftmost slot."""
    return reduce(np.kron, ops)


def embed(op, slot, n_qubits):
    """Place a single-qubit ``op`` at ``slot`` in an ``n_qubits`` register."""
    if not 0 <= slot < n_qubits:
        raise ValueError(f"slot {slot} out of range for {n_qubits} qubits")
    return kron(*[op if i == slot else I2 for i in range(n_qubits)])


def basis_index(bits, zero="g"):
    """Computational index of a product state label such as ``"geg"`` or ``"101"``.

    Characters equal to ``zero`` (or ``"0"``) map to bit 0; anything in
    ``"e1"`` maps to bit 1.
    """
    index = 0
    for ch in bits:
        if ch in (zero, "0"):
            bit = 0
        elif ch in "e1":
            bit = 1
        else:
            raise ValueError(f"bad basis label {bits!r}")
        index = 2 * index + bit
    return index


def is_hermitian(H, tol=1e-10):
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and np.max(np.abs(H - H.conj().T), initial=0.0) <= tol


def fix_phase(v, tol=1e-14):
    """Return ``v`` with a deterministic global phase.

    The first component is made real and non-negative; if it vanishes the
    second one is made real and positive instead.
    """
    v = np.asarray(v, dtype=complex)
    lead = v[0] if abs(v[0]) > tol else v[1]
    if abs(lead) == 0:
        return v
    out = v * (abs(lead) / lead)
    if abs(v[0]) <= tol:
        out[0] = 0.0
    return out


def lowering(n_cut):
    """Truncated annihilation operator on Fock states 0..n_cut-1."""
    return np.diag(np.sqrt(np.arange(1, n_cut, dtype=float)), 1).astype(complex)


def fock_momentum(n_cut, delta):
    """Phonon momentum ``i (a^dag - a) / (2 delta)`` truncated at ``n_cut``.

    ``delta`` is the ground-state width, so that ``x = delta (a + a^dag)``
    and ``[x, p] = i`` on the untruncated space.
    """
    a = lowering(n_cut)
    return 1j * (a.conj().T - a) / (2.0 * delta)


def coherent_state(alpha, n_cut):
    """Coherent state amplitudes on a truncated Fock space, renormalized."""
    n = np.arange(n_cut)
    if alpha == 0:
        psi = np.zeros(n_cut, dtype=complex)
        psi[0] = 1.0
        return psi
    log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    psi = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return psi / np.linalg.norm(psi)
