"""Non-unitary propagation, post-selection and spectral classification."""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NumericalFailure, PostSelectionExtinct, ValidationError
from .model import DensityMatrix, n_qubits_of

EXTINCT_SURVIVAL = 1e-24

# Up to this dimension the exponential is evaluated in extended precision so
# that small entries survive the squaring phase with full double accuracy.
EXTENDED_PRECISION_MAX_DIM = 64

# Higham (2005) bounds on ||A||_1 for which the degree-m diagonal Padé
# approximant reaches double precision without scaling.
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


@lru_cache(maxsize=None)
def _pade_coefficients(m: int, dtype=np.float64) -> tuple:
    f = math.factorial
    exact = (Fraction(f(2 * m - k) * f(m), f(2 * m) * f(k) * f(m - k)) for k in range(m + 1))
    return tuple(dtype(c.numerator) / dtype(c.denominator) for c in exact)


def _solve_extended(M: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting; works for clongdouble."""
    n = M.shape[0]
    aug = np.concatenate([M, B], axis=1)
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        if aug[p, k] == 0:
            raise NumericalFailure("singular Padé denominator")
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        aug[k + 1:] -= np.outer(aug[k + 1:, k] / aug[k, k], aug[k])
    X = aug[:, n:]
    for k in range(n - 1, -1, -1):
        X[k] = (X[k] - aug[k, k + 1:n] @ X[k + 1:]) / aug[k, k]
    return X


def _pade(A: np.ndarray, m: int) -> np.ndarray:
    b = _pade_coefficients(m, np.longdouble if A.dtype == np.clongdouble else np.float64)
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    else:
        powers = [ident, A2]
        for _ in range(2, m // 2 + 1):
            powers.append(powers[-1] @ A2)
        U = A @ sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
        V = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
    if A.dtype == np.clongdouble:
        return _solve_extended(V - U, V + U)
    return np.linalg.solve(V - U, V + U)


def matrix_exponential(A) -> np.ndarray:
    """exp(A) by scaling and squaring with a diagonal Padé approximant.

    Works for non-normal and defective matrices; no eigendecomposition is
    involved.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"matrix_exponential needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix_exponential: non-finite entries")
    if A.shape[0] == 0:
        return A.copy()
    if A.shape[0] <= EXTENDED_PRECISION_MAX_DIM:
        A = A.astype(np.clongdouble)

    norm = float(np.abs(A).sum(axis=0).max())
    for m in (3, 5, 7, 9):
        if norm <= _PADE_THETA[m]:
            return _pade(A, m).astype(complex)

    s = max(0, math.ceil(math.log2(norm / _PADE_THETA[13])))
    X = _pade(A / 2 ** s, 13)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            X = X @ X
    X = X.astype(complex)
    if not np.all(np.isfinite(X)):
        raise NumericalFailure("matrix_exponential overflowed")
    return X


def propagator(H, t: float) -> np.ndarray:
    """e^{-iHt}."""
    return matrix_exponential(-1j * t * np.asarray(H, dtype=complex))


@dataclass(frozen=True, eq=False)
class PropagationResult:
    state: np.ndarray  # unnormalized e^{-iHt}|ψ0>
    survival_probability: float
    time: float


def _check_dims(H: np.ndarray, psi: np.ndarray) -> None:
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(f"Hamiltonian must be square, got shape {H.shape}")
    if psi.shape != (H.shape[0],):
        raise ValidationError(f"state of length {psi.shape[0] if psi.ndim else 0} does not match "
                              f"Hamiltonian dimension {H.shape[0]}")


def _check_normalized(psi: np.ndarray, what: str = "state") -> None:
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-9:
        raise ValidationError(f"{what} must be normalized within 1e-9")


def evolve(H, psi0, t: float) -> PropagationResult:
    H = np.asarray(H, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    _check_dims(H, psi0)
    _check_normalized(psi0, "initial state")
    state = propagator(H, t) @ psi0
    return PropagationResult(state, float(np.vdot(state, state).real), float(t))


def normalize(psi, min_survival: float = EXTINCT_SURVIVAL) -> tuple[np.ndarray, float]:
    """Post-selected state |ψ>/√<ψ|ψ> together with the survival <ψ|ψ>.

    Raises PostSelectionExtinct when the survival falls below ``min_survival``.
    """
    psi = np.asarray(psi, dtype=complex)
    survival = float(np.vdot(psi, psi).real)
    if not survival > 0 or survival < min_survival:
        raise PostSelectionExtinct(survival)
    return psi / math.sqrt(survival), survival


def density_matrix(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    n = n_qubits_of(psi)
    _check_normalized(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), tuple(range(1, n + 1)))


class TimePoint(NamedTuple):
    time: float
    state: np.ndarray  # post-selected, unit norm
    survival: float


def _is_uniform(times: np.ndarray) -> bool:
    if len(times) < 3:
        return len(times) == 2
    steps = np.diff(times)
    return bool(np.allclose(steps, steps[0], rtol=1e-10, atol=0))


def time_series(H, psi0, t_grid: Sequence[float],
                min_survival: float = EXTINCT_SURVIVAL) -> list[TimePoint]:
    """Post-selected states and survival probabilities on a time grid.

    Uniform grids reuse a single step propagator and renormalize after every
    step, carrying the survival as a running log so it never underflows
    mid-propagation.  Other grids are evaluated point by point.
    """
    H = np.asarray(H, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    _check_dims(H, psi0)
    _check_normalized(psi0, "initial state")
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValidationError("time grid must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValidationError("time grid must be ascending and start at t ≥ 0")

    out = []
    if _is_uniform(times):
        step = propagator(H, times[1] - times[0])
        state = propagator(H, times[0]) @ psi0 if times[0] else psi0.copy()
        log_survival = 0.0
        for k, t in enumerate(times):
            if k:
                state = step @ state
            norm2 = float(np.vdot(state, state).real)
            if not norm2 > 0:
                raise PostSelectionExtinct(0.0, float(t))
            log_survival += math.log(norm2)
            state = state / math.sqrt(norm2)
            survival = math.exp(log_survival)
            if survival < min_survival:
                raise PostSelectionExtinct(survival, float(t))
            out.append(TimePoint(float(t), state, survival))
        return out

    for t in times:
        raw = propagator(H, t) @ psi0
        try:
            state, survival = normalize(raw, min_survival)
        except PostSelectionExtinct as exc:
            raise PostSelectionExtinct(exc.survival, float(t)) from None
        out.append(TimePoint(float(t), state, survival))
    return out


def _taylor_step(A: np.ndarray, terms: int = 40) -> np.ndarray:
    result = np.eye(A.shape[0], dtype=complex)
    term = result.copy()
    for k in range(1, terms + 1):
        term = term @ A / k
        result = result + term
        if np.abs(term).max() < 1e-20:
            break
    return result


def substep_evolve(H, psi0, t: float, steps: int = 10_000) -> np.ndarray:
    """Reference propagation (e^{-iHδt})^N |ψ0> with a truncated Taylor step.

    Independent of :func:`matrix_exponential`; used as a cross-check oracle.
    Returns the unnormalized state.
    """
    H = np.asarray(H, dtype=complex)
    psi = np.asarray(psi0, dtype=complex)
    _check_dims(H, psi)
    dt = t / steps
    A = -1j * dt * H
    if np.linalg.norm(A, 1) > 1.0:
        raise ValidationError("substep_evolve: step too coarse (||H dt||_1 > 1); raise steps")
    U = _taylor_step(A)
    for _ in range(steps):
        psi = U @ psi
    return psi


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray
    is_pt_symmetric_phase: bool
    imag_spread: float
    residual_imag: float  # max |Im λ − mean Im λ|
    tolerance: float


def spectrum(H, tolerance: float) -> SpectrumReport:
    """Eigenvalues of H and passive-PT classification.

    The uniform loss shift is removed by subtracting the mean imaginary part;
    the phase is unbroken when every residual imaginary part is within
    ``tolerance``.
    """
    if not tolerance > 0:
        raise ValidationError("spectrum tolerance must be > 0")
    H = np.asarray(H, dtype=complex)
    try:
        ev = np.linalg.eigvals(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solver did not converge: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalFailure("eigenvalue solver returned non-finite values")
    ev = ev[np.lexsort((ev.imag, ev.real))]
    residual = float(np.abs(ev.imag - ev.imag.mean()).max())
    return SpectrumReport(
        eigenvalues=ev,
        is_pt_symmetric_phase=residual <= tolerance,
        imag_spread=float(ev.imag.max() - ev.imag.min()),
        residual_imag=residual,
        tolerance=float(tolerance),
    )
