"""Entanglement diagnostics for pure post-selected states.

All functions take plain complex amplitude vectors in the package basis
convention (qubit 1 = most significant bit, bit 0 = ``|e>``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .model import DensityMatrix, ghz_state, n_qubits_of, qubit_mask

EIGEN_FLOOR = 1e-12
LOCAL_PHASE_RESOLUTION = 1e-4
_MAX_GRID = 2 ** 18
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_YY = np.kron(_Y, _Y)


def _as_state(psi, normalized: bool = True) -> tuple[np.ndarray, int]:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValidationError("state must be a 1-d amplitude vector")
    n = n_qubits_of(psi)
    if normalized and abs(np.vdot(psi, psi).real - 1.0) > 1e-9:
        raise ValidationError("state must be normalized within 1e-9")
    return psi, n


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduce ``rho`` to the qubits in ``keep`` (labels, kept in rho's order)."""
    keep = list(keep)
    if not keep or any(q not in rho.qubits for q in keep):
        raise ValidationError(f"keep set {keep} must be a non-empty subset of {list(rho.qubits)}")
    kept = [q for q in rho.qubits if q in set(keep)]
    m = rho.n_qubits
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:m])
    col = list(letters[m:2 * m])
    for pos, q in enumerate(rho.qubits):
        if q not in kept:
            col[pos] = row[pos]  # repeated index -> traced
    out_row = [row[p] for p, q in enumerate(rho.qubits) if q in kept]
    out_col = [col[p] for p, q in enumerate(rho.qubits) if q in kept]
    expr = "".join(row) + "".join(col) + "->" + "".join(out_row) + "".join(out_col)
    d = 2 ** len(kept)
    reduced = np.einsum(expr, rho.matrix.reshape([2] * (2 * m))).reshape(d, d)
    return DensityMatrix(reduced, tuple(kept))


def reduced_density_matrix(psi, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state of a pure state on ``keep`` without forming |ψ><ψ|."""
    psi, n = _as_state(psi, normalized=False)
    kept = sorted(set(int(q) for q in keep))
    if not kept or kept[0] < 1 or kept[-1] > n:
        raise ValidationError(f"keep set {kept} must be a non-empty subset of 1..{n}")
    traced = [q for q in range(1, n + 1) if q not in kept]
    tensor = np.transpose(psi.reshape([2] * n), [q - 1 for q in kept + traced])
    m = tensor.reshape(2 ** len(kept), -1)
    return DensityMatrix(m @ m.conj().T, tuple(kept))


def von_neumann_entropy(rho) -> float:
    """-Tr[ρ ln ρ] in nats; eigenvalues below 1e-12 contribute nothing."""
    m = _as_matrix(rho)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    w = w[w > EIGEN_FLOOR]
    return float(max(0.0, -np.sum(w * np.log(w))))


def entanglement_entropies(psi) -> list[float]:
    """Single-qubit entropies S_1..S_n of a pure state."""
    psi, n = _as_state(psi, normalized=False)
    return [von_neumann_entropy(reduced_density_matrix(psi, [j])) for j in range(1, n + 1)]


def three_tangle(psi) -> float:
    """Residual tripartite entanglement of a normalized three-qubit state."""
    psi, n = _as_state(psi)
    if n != 3:
        raise ValidationError(f"three_tangle needs exactly 3 qubits, got {n}")
    (eee, eef, efe, eff, fee, fef, ffe, fff) = psi
    d1 = (eee * fff) ** 2 + (eef * ffe) ** 2 + (efe * fef) ** 2 + (fee * eff) ** 2
    d2 = (eee * fff * (eff * fee + fef * efe + ffe * eef)
          + eff * fee * fef * efe + eff * fee * ffe * eef + fef * efe * ffe * eef)
    d3 = eee * ffe * fef * eff + fff * eef * efe * fee
    return float(min(4 * abs(d1 - 2 * d2 + 4 * d3), 1 + 1e-9))


def fidelity(psi, target) -> float:
    """|<ψ|φ>|² between two normalized states."""
    psi, _ = _as_state(psi)
    target, _ = _as_state(target)
    if psi.shape != target.shape:
        raise ValidationError(f"dimension mismatch: {psi.shape[0]} vs {target.shape[0]}")
    return float(min(abs(np.vdot(psi, target)) ** 2, 1 + 1e-9))


def apply_local_phase(psi, j: int, phi: float) -> np.ndarray:
    """Apply Z(φ) = diag(e^{iφ}, 1) to qubit ``j``."""
    psi, n = _as_state(psi, normalized=False)
    mask = qubit_mask(j, n)
    on_e = (np.arange(psi.size) & mask) == 0
    return np.where(on_e, psi * np.exp(1j * phi), psi)


def _e_occupation(n: int) -> np.ndarray:
    idx = np.arange(2 ** n)[:, None]
    masks = np.array([qubit_mask(j, n) for j in range(1, n + 1)])[None, :]
    return ((idx & masks) == 0).astype(float)


def optimize_local_phases(psi, target, grid_points: int = 16) -> tuple[np.ndarray, float]:
    """Best fidelity with ``target`` over products of single-qubit Z(φ_j) gates.

    Coarse search on a ``grid_points``-per-axis grid of [0, 2π)^n followed by
    exact coordinate ascent (each one-phase subproblem is solved in closed
    form).  Returns the phases (radians, in [0, 2π)) and the fidelity.
    When the full grid would exceed 2**18 points, the search restarts
    coordinate ascent from a fixed set of grid-aligned starting points instead.
    """
    psi, n = _as_state(psi)
    target, _ = _as_state(target)
    if psi.shape != target.shape:
        raise ValidationError(f"dimension mismatch: {psi.shape[0]} vs {target.shape[0]}")
    if grid_points < 8:
        raise ValidationError("grid_points must be ≥ 8")

    weights = target.conj() * psi
    support = np.flatnonzero(np.abs(weights) > 0)
    if support.size == 0:
        return np.zeros(n), 0.0
    w = weights[support]
    occ = _e_occupation(n)[support]  # (k, n)

    axis = 2 * np.pi * np.arange(grid_points) / grid_points
    if grid_points ** n <= _MAX_GRID:
        grids = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
        overlaps = np.abs(np.exp(1j * grids @ occ.T) @ w)
        starts = grids[np.argsort(overlaps)[-4:]]
    else:
        rng = np.random.default_rng(0)
        starts = axis[rng.integers(0, grid_points, size=(64, n))]

    best_phases, best = np.zeros(n), -1.0
    for start in starts:
        phases = _coordinate_ascent(w, occ, start.copy())
        value = abs(np.exp(1j * occ @ phases) @ w) ** 2
        if value > best:
            best, best_phases = value, phases
    baseline = abs(w.sum()) ** 2
    if baseline >= best:
        best, best_phases = baseline, np.zeros(n)
    return np.mod(best_phases, 2 * np.pi), float(min(best, 1 + 1e-9))


def _coordinate_ascent(w: np.ndarray, occ: np.ndarray, phases: np.ndarray,
                       max_sweeps: int = 200) -> np.ndarray:
    # with all other phases fixed, overlap(φ_j) = A + B e^{iφ_j}; optimum φ_j = arg A − arg B
    for _ in range(max_sweeps):
        moved = 0.0
        for j in range(len(phases)):
            rest = occ @ phases - occ[:, j] * phases[j]
            terms = w * np.exp(1j * rest)
            on = occ[:, j] == 1
            B = terms[on].sum()
            A = terms[~on].sum()
            if abs(A) == 0 or abs(B) == 0:
                continue
            new = float(np.angle(A) - np.angle(B))
            moved = max(moved, abs(np.angle(np.exp(1j * (new - phases[j])))))
            phases[j] = new
        if moved < LOCAL_PHASE_RESOLUTION * 1e-3:
            break
    return phases


def pairwise_concurrence(rho2) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    m = _as_matrix(rho2)
    if m.shape != (4, 4):
        raise ValidationError(f"concurrence needs a 4x4 density matrix, got {m.shape}")
    R = m @ _YY @ m.conj() @ _YY
    ev = np.linalg.eigvals(R).real
    lam = np.sort(np.sqrt(np.where(ev > EIGEN_FLOOR, ev, 0.0)))[::-1]
    return float(min(max(0.0, lam[0] - lam[1:].sum()), 1.0))


@dataclass(frozen=True)
class EntanglementReport:
    time: float
    tau: float | None
    entropies: tuple[float, ...]
    fidelity_ghz: float
    fidelity_ghz_up_to_local_phases: float
    survival: float


def report(psi, time: float, survival: float, grid_points: int = 8) -> EntanglementReport:
    psi, n = _as_state(psi)
    target = ghz_state(n)
    _, best = optimize_local_phases(psi, target, grid_points)
    return EntanglementReport(
        time=float(time),
        tau=three_tangle(psi) if n == 3 else None,
        entropies=tuple(entanglement_entropies(psi)),
        fidelity_ghz=fidelity(psi, target),
        fidelity_ghz_up_to_local_phases=best,
        survival=float(survival),
    )
