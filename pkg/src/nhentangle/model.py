"""Lossy two-level qubits with all-to-all exchange coupling.

Basis convention used everywhere in the package: a basis index ``i`` in
``[0, 2**n)`` is read as ``n`` bits with qubit 1 as the most significant bit.
Bit value 0 is the lossy level ``|e>``, bit value 1 is ``|f>``.  For three
qubits index 0 is ``|eee>`` and index 7 is ``|fff>``.

Rates (detuning, decay, drive, coupling) are in units of a reference
coupling ``J``; times are the dimensionless ``Jt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import ValidationError

MAX_QUBITS = 12

# single-qubit operators in the (|e>, |f>) basis
IDENTITY = np.eye(2, dtype=complex)
SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)  # |e><f|
SIGMA_DAG = SIGMA.conj().T  # |f><e|
SIGMA_X = SIGMA + SIGMA_DAG
PROJ_E = SIGMA @ SIGMA_DAG  # |e><e|
PROJ_F = SIGMA_DAG @ SIGMA

DEFAULT_COHERENT_PHASE = 0.288 * math.pi


def _as_tuple(value, n: int, name: str) -> tuple[float, ...]:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValidationError(f"{name} must have one entry per qubit ({n}), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class SystemConfig:
    """Parameters of the all-to-all coupled lossy qubit Hamiltonian.

    ``delta``, ``gamma`` and ``omega`` are per-qubit detuning, decay rate and
    drive amplitude.  ``coupling`` is the symmetric exchange matrix with zero
    diagonal.  Scalars are broadcast to every qubit (or every pair).
    """

    n_qubits: int
    delta: tuple[float, ...] = field(default=0.0)
    gamma: tuple[float, ...] = field(default=0.0)
    omega: tuple[float, ...] = field(default=0.0)
    coupling: tuple[tuple[float, ...], ...] = field(default=1.0)

    def __post_init__(self):
        n = self.n_qubits
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
            raise ValidationError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n!r}")
        object.__setattr__(self, "n_qubits", int(n))
        object.__setattr__(self, "delta", _as_tuple(self.delta, n, "delta"))
        object.__setattr__(self, "gamma", _as_tuple(self.gamma, n, "gamma"))
        object.__setattr__(self, "omega", _as_tuple(self.omega, n, "omega"))
        if any(g < 0 for g in self.gamma):
            raise ValidationError(f"gamma ≥ 0 violated: {self.gamma}")

        if np.ndim(self.coupling) == 0:
            c = float(self.coupling) * (np.ones((n, n)) - np.eye(n))
        else:
            c = np.asarray(self.coupling, dtype=float)
        if c.shape != (n, n):
            raise ValidationError(f"coupling must be {n}x{n}, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValidationError("coupling must be finite")
        if not np.array_equal(c, c.T):
            raise ValidationError("coupling[j][k] == coupling[k][j] violated")
        if np.any(np.diag(c) != 0):
            raise ValidationError("coupling[j][j] == 0 violated")
        object.__setattr__(self, "coupling", tuple(tuple(float(x) for x in row) for row in c))

    @classmethod
    def symmetric(cls, n_qubits: int, omega: float = 0.0, gamma: float = 0.0,
                  coupling: float = 1.0, delta: float = 0.0) -> "SystemConfig":
        return cls(n_qubits, delta=delta, gamma=gamma, omega=omega, coupling=coupling)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def coupling_matrix(self) -> np.ndarray:
        return np.array(self.coupling, dtype=float)

    def is_symmetric(self) -> bool:
        """True when every qubit and every pair carry identical parameters."""
        c = self.coupling_matrix
        off = c[~np.eye(self.n_qubits, dtype=bool)]
        return (len(set(self.delta)) == 1 and len(set(self.gamma)) == 1
                and len(set(self.omega)) == 1 and (off.size == 0 or np.all(off == off[0])))

    def replace(self, **changes) -> "SystemConfig":
        fields = dict(n_qubits=self.n_qubits, delta=self.delta, gamma=self.gamma,
                      omega=self.omega, coupling=self.coupling)
        fields.update(changes)
        return SystemConfig(**fields)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense density matrix over an ordered subset of qubits (1-based labels)."""

    matrix: np.ndarray
    qubits: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2 ** len(self.qubits)
        if m.shape != (d, d):
            raise ValidationError(f"density matrix over {len(self.qubits)} qubits must be {d}x{d}, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)


def n_qubits_of(vec: np.ndarray) -> int:
    """Number of qubits of a length-2**n vector or a 2**n square matrix."""
    size = np.shape(vec)[0]
    n = int(size).bit_length() - 1
    if size < 2 or 2 ** n != size:
        raise ValidationError(f"dimension {size} is not a power of two >= 2")
    return n


def _check_qubit(j: int, n: int) -> None:
    if not 1 <= j <= n:
        raise ValidationError(f"qubit index {j} out of range 1..{n}")


def qubit_mask(j: int, n: int) -> int:
    """Bit mask selecting qubit ``j`` (1-based) in a basis index."""
    _check_qubit(j, n)
    return 1 << (n - j)


def embed_single_qubit_op(op, j: int, n: int) -> np.ndarray:
    """Return ``I⊗...⊗op⊗...⊗I`` with ``op`` acting on qubit ``j`` (1-based)."""
    _check_qubit(j, n)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValidationError(f"single-qubit operator must be 2x2, got {op.shape}")
    return reduce(np.kron, [op if k == j else IDENTITY for k in range(1, n + 1)])


def build_hamiltonian(config: SystemConfig) -> np.ndarray:
    """Dense non-Hermitian Hamiltonian of the coupled lossy qubits.

    H = Σ_j (Δ_j − iγ_j/2)|e><e|_j + Σ_j Ω_j σ^x_j
        + Σ_{j<k} J_jk (σ_j† σ_k + σ_j σ_k†)

    with σ_j = |e><f|_j and σ^x_j = σ_j + σ_j†.  Assembled directly on basis
    indices rather than through Kronecker products.
    """
    n = config.n_qubits
    dim = 2 ** n
    idx = np.arange(dim)
    H = np.zeros((dim, dim), dtype=complex)

    diag = np.zeros(dim, dtype=complex)
    for j in range(1, n + 1):
        mask = qubit_mask(j, n)
        is_e = (idx & mask) == 0
        diag += np.where(is_e, config.delta[j - 1] - 0.5j * config.gamma[j - 1], 0.0)
        if config.omega[j - 1] != 0:
            H[idx ^ mask, idx] += config.omega[j - 1]
    H[idx, idx] += diag

    c = config.coupling
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            if c[j - 1][k - 1] == 0:
                continue
            mj, mk = qubit_mask(j, n), qubit_mask(k, n)
            # flip-flop: only acts where qubits j and k differ
            src = idx[((idx & mj) == 0) != ((idx & mk) == 0)]
            H[src ^ (mj | mk), src] += c[j - 1][k - 1]
    return H


def basis_state(label: str) -> np.ndarray:
    """Bare basis state from a label such as ``"eef"``."""
    if not label or set(label) - {"e", "f"}:
        raise ValidationError(f"basis label must be a non-empty string over 'e'/'f', got {label!r}")
    psi = np.zeros(2 ** len(label), dtype=complex)
    psi[int(label.replace("e", "0").replace("f", "1"), 2)] = 1.0
    return psi


def product_state(per_qubit: Sequence[tuple[complex, complex]]) -> np.ndarray:
    """Normalized tensor product of single-qubit states given as (amp_e, amp_f)."""
    if len(per_qubit) == 0:
        raise ValidationError("product_state needs at least one qubit")
    factors = []
    for j, pair in enumerate(per_qubit, start=1):
        v = np.asarray(pair, dtype=complex)
        if v.shape != (2,):
            raise ValidationError(f"qubit {j}: expected an (amp_e, amp_f) pair")
        norm = np.linalg.norm(v)
        if norm == 0 or not np.isfinite(norm):
            raise ValidationError(f"qubit {j}: single-qubit state has zero norm")
        factors.append(v / norm)
    return reduce(np.kron, factors)


def spin_coherent_state(phi: float = DEFAULT_COHERENT_PHASE, n: int = 3) -> np.ndarray:
    """(|f> + e^{iφ}|e>)^{⊗n}, normalized."""
    return product_state([(np.exp(1j * phi), 1.0)] * n)


def ghz_state(n: int) -> np.ndarray:
    """(|e...e> + |f...f>)/√2."""
    if n < 2:
        raise ValidationError(f"GHZ state needs n ≥ 2, got {n}")
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return psi


def initial_state(spec: str, n: int) -> np.ndarray:
    """Named initial state: ``all-f``, ``all-e``, ``ghz`` or ``spin-coherent[:PHI]``.

    ``PHI`` is in radians; a trailing ``pi`` multiplies by π (``0.288pi``).
    """
    name, _, arg = spec.partition(":")
    if name == "all-f":
        return basis_state("f" * n)
    if name == "all-e":
        return basis_state("e" * n)
    if name == "ghz":
        return ghz_state(n)
    if name == "spin-coherent":
        return spin_coherent_state(parse_phase(arg) if arg else DEFAULT_COHERENT_PHASE, n)
    raise ValidationError(f"unknown initial state {spec!r}")


def parse_phase(text: str) -> float:
    text = text.strip()
    try:
        if text.endswith("pi"):
            coeff = text[:-2].rstrip("*")
            return (float(coeff) if coeff else 1.0) * math.pi
        return float(text)
    except ValueError:
        raise ValidationError(f"cannot parse phase {text!r}") from None
