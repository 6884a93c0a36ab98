"""Eigen-analysis of the 3x3 dynamic matrix and the mechanical dark mode.

At zero damping the spectrum of M is {0, -g0, +g0} and the null eigenmode
[-g2, 0, g1]/g0 carries no mechanical weight: it is the dark mode that
stores the photonic state during adiabatic transfer.  Damping moves the
dark eigenvalue to -i(kappa2 g1^2 + kappa1 g2^2)/2g0^2 and mixes in a
mechanical component proportional to (kappa1 - kappa2).

Eigenvalues are computed from the characteristic cubic in closed form
(Cardano) and polished with one Newton step; eigenvectors come from
inverse iteration.  The fixed 3x3 size makes the closed form both faster
and more reproducible than an iterative QR solver.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .model import CouplingSchedule, DynamicMatrix, SystemParams, dynamic_matrix_at

__all__ = [
    "Eigensystem",
    "DarkMode",
    "SpectralError",
    "eigensystem",
    "eigensystem_sweep",
    "dark_mode_exact",
    "dark_mode_perturbative",
    "adiabatic_correction_norm",
]

_RESIDUAL_TOL = 1e-10


class SpectralError(RuntimeError):
    """Eigen-decomposition could not be completed to tolerance."""


@dataclass(frozen=True, eq=False)
class Eigensystem:
    """Eigenvalues, unit eigenvectors (columns of U), and U^-1 of one M."""

    lambdas: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]


@dataclass(frozen=True, eq=False)
class DarkMode:
    """The (near-)mechanically-dark eigenmode of M."""

    vector: np.ndarray
    lambda1: complex
    mechanical_weight: float


def _det3(a: np.ndarray) -> complex:
    return (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _adjugate3(a: np.ndarray) -> np.ndarray:
    out = np.empty((3, 3), dtype=complex)
    out[0, 0] = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    out[0, 1] = a[0, 2] * a[2, 1] - a[0, 1] * a[2, 2]
    out[0, 2] = a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]
    out[1, 0] = a[1, 2] * a[2, 0] - a[1, 0] * a[2, 2]
    out[1, 1] = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    out[1, 2] = a[0, 2] * a[1, 0] - a[0, 0] * a[1, 2]
    out[2, 0] = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    out[2, 1] = a[0, 1] * a[2, 0] - a[0, 0] * a[2, 1]
    out[2, 2] = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return out


def _cardano(b: complex, c: complex, d: complex) -> list[complex]:
    """Roots of x^3 + b x^2 + c x + d with complex coefficients."""
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    if p == 0 and q == 0:
        y = [0.0 + 0.0j] * 3
    else:
        s = cmath.sqrt(q * q / 4.0 + p**3 / 27.0)
        # pick the cube whose base has the larger modulus to avoid cancellation
        u3 = -q / 2.0 + s
        alt = -q / 2.0 - s
        if abs(alt) > abs(u3):
            u3 = alt
        u = u3 ** (1.0 / 3.0)
        w = complex(-0.5, math.sqrt(3.0) / 2.0)
        y = []
        for k in range(3):
            uk = u * w**k
            y.append(uk - p / (3.0 * uk))
    roots = [yk - b / 3.0 for yk in y]
    # one Newton polish per root to control cancellation
    polished = []
    for x in roots:
        f = x**3 + b * x * x + c * x + d
        fp = 3.0 * x * x + 2.0 * b * x + c
        if fp != 0:
            x = x - f / fp
        polished.append(x)
    return polished


def _char_coeffs(m: np.ndarray) -> tuple[complex, complex, complex]:
    """Coefficients (b, c, d) of det(lam I - M) = lam^3 + b lam^2 + c lam + d."""
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (
        m[0, 0] * m[1, 1]
        - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2]
        - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2]
        - m[1, 2] * m[2, 1]
    )
    return -tr, minors, -_det3(m)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(v)))
    ph = v[i] / abs(v[i])
    return v * np.conj(ph)


def _inverse_iterate(m: np.ndarray, lam: complex, b0: np.ndarray, shift: float) -> np.ndarray:
    v = b0 / np.linalg.norm(b0)
    shifted = m - (lam + shift * (1.0 + 1.0j)) * np.eye(3)
    for _ in range(3):
        try:
            v = np.linalg.solve(shifted, v)
        except np.linalg.LinAlgError:
            return b0 / np.linalg.norm(b0)
        v = v / np.linalg.norm(v)
    return v


def _eigenvector(
    m: np.ndarray,
    lam: complex,
    scale: float,
    taken: list[tuple[complex, np.ndarray]],
) -> np.ndarray:
    """Inverse iteration seeded by the adjugate of (M - lam I)."""
    shifted = m - lam * np.eye(3)
    adj = _adjugate3(shifted)
    norms = np.linalg.norm(adj, axis=0)
    candidates: list[np.ndarray] = []
    if norms.max() > 1e-12 * max(scale, 1.0) ** 2:
        candidates.append(adj[:, int(np.argmax(norms))])
    candidates.extend(np.eye(3)[:, k] for k in range(3))
    shift = 1e-9 * max(scale, 1.0)
    # vectors claimed by a numerically equal eigenvalue; inverse iteration
    # cannot separate those by the shift, so force a fresh direction
    blocked = [
        u for mu, u in taken if abs(mu - lam) <= 1e-8 * max(scale, 1.0)
    ]
    best: np.ndarray | None = None
    best_res = math.inf
    for b0 in candidates:
        v = _inverse_iterate(m, lam, b0.astype(complex), shift)
        if any(abs(np.vdot(u, v)) > 0.999 for u in blocked):
            continue
        res = np.linalg.norm(m @ v - lam * v)
        if res < best_res:
            best, best_res = v, res
        if res <= _RESIDUAL_TOL * max(scale, 1.0):
            return v
    if best is None or best_res > 1e3 * _RESIDUAL_TOL * max(scale, 1.0):
        raise SpectralError(
            f"eigenvector residual {best_res:.3e} exceeds tolerance for lambda = {lam}"
        )
    return best


def eigensystem(m: DynamicMatrix, reference: Eigensystem | None = None) -> Eigensystem:
    """Full eigensystem of M.

    Without a reference the modes are ordered by ascending Re(lambda) and
    each vector's phase is fixed so its largest-modulus component is real
    and positive.  With a reference (a previous step of a time sweep) the
    modes are matched to it by maximal overlap and the phases are aligned
    to the reference gauge, which keeps U(t) differentiable along sweeps.
    """
    mat = m.entries
    scale = float(np.linalg.norm(mat))
    lambdas = _cardano(*_char_coeffs(mat))
    taken: list[tuple[complex, np.ndarray]] = []
    vectors = []
    for lam in lambdas:
        v = _eigenvector(mat, lam, scale, taken)
        taken.append((lam, v))
        vectors.append(v)

    order: Sequence[int]
    if reference is None:
        order = sorted(range(3), key=lambda i: (lambdas[i].real, lambdas[i].imag))
        cols = [_fix_phase(vectors[i]) for i in order]
    else:
        best_perm, best_score = None, -1.0
        for perm in permutations(range(3)):
            score = sum(
                abs(np.vdot(reference.vectors[:, i], vectors[perm[i]]))
                for i in range(3)
            )
            if score > best_score:
                best_perm, best_score = perm, score
        order = list(best_perm)
        cols = []
        for i in range(3):
            v = vectors[order[i]]
            ov = np.vdot(reference.vectors[:, i], v)
            if abs(ov) < 0.5:
                raise SpectralError(
                    f"continuity tracking lost mode {i}: overlap {abs(ov):.3f}"
                )
            cols.append(v * np.conj(ov / abs(ov)))

    u = np.column_stack(cols)
    lam_sorted = np.array([lambdas[i] for i in order])
    det_u = _det3(u)
    if abs(det_u) < 1e-12:
        raise SpectralError("eigenvector matrix is numerically singular")
    inv = _adjugate3(u) / det_u

    for i in range(3):
        res = np.linalg.norm(mat @ u[:, i] - lam_sorted[i] * u[:, i])
        if res > 1e3 * _RESIDUAL_TOL * max(scale, 1.0):
            raise SpectralError(f"eigenpair {i} residual {res:.3e} out of tolerance")
    return Eigensystem(lambdas=lam_sorted, vectors=u, inverse=inv)


def eigensystem_sweep(
    params: SystemParams, schedule: CouplingSchedule, times: Sequence[float]
) -> list[Eigensystem]:
    """Eigensystems along a schedule with continuity-tracked ordering."""
    out: list[Eigensystem] = []
    ref: Eigensystem | None = None
    for t in times:
        ref = eigensystem(dynamic_matrix_at(params, schedule, t), reference=ref)
        out.append(ref)
    return out


def _ideal_dark_vector(g1: float, g2: float) -> np.ndarray:
    g0 = math.hypot(g1, g2)
    if g0 == 0:
        raise SpectralError("dark mode undefined at g1 = g2 = 0")
    return np.array([-g2 / g0, 0.0, g1 / g0], dtype=complex)


def dark_mode_exact(m: DynamicMatrix) -> DarkMode:
    """Select the exact eigenmode closest to the ideal dark vector."""
    ideal = _ideal_dark_vector(m.g1, m.g2)
    es = eigensystem(m)
    overlaps = [abs(np.vdot(ideal, es.vectors[:, i])) for i in range(3)]
    ranked = sorted(range(3), key=lambda i: -overlaps[i])
    if overlaps[ranked[0]] - overlaps[ranked[1]] < 1e-6:
        raise SpectralError(
            "ambiguous dark-mode selection: overlaps "
            f"{overlaps[ranked[0]]:.8f} and {overlaps[ranked[1]]:.8f}"
        )
    i = ranked[0]
    v = _fix_phase(es.vectors[:, i])
    return DarkMode(vector=v, lambda1=complex(es.lambdas[i]), mechanical_weight=float(abs(v[1]) ** 2))


def dark_mode_perturbative(params: SystemParams, g1: float, g2: float) -> DarkMode:
    """First-order dark mode and eigenvalue for weak damping.

    psi1 = [-g2/g0, -i(kappa1 - kappa2) g1 g2 / 2 g0^3, g1/g0]  (normalized)
    lambda1 = -i (kappa2 g1^2 + kappa1 g2^2) / 2 g0^2
    """
    g0 = math.hypot(g1, g2)
    if g0 == 0:
        raise SpectralError("perturbative dark mode undefined at g0 = 0")
    worst = max(params.kappa1, params.kappa2, params.gamma_m)
    if worst >= g0:
        raise SpectralError(
            f"perturbative regime requires damping < g0, got ratio {worst / g0:.3f}"
        )
    if worst > 0.2 * g0:
        warnings.warn(
            f"damping/g0 = {worst / g0:.3f} is not small; perturbative dark mode "
            "may be inaccurate",
            stacklevel=2,
        )
    v = np.array(
        [
            -g2 / g0,
            -1j * (params.kappa1 - params.kappa2) * g1 * g2 / (2.0 * g0**3),
            g1 / g0,
        ],
        dtype=complex,
    )
    v = _fix_phase(v)
    lam = -1j * (params.kappa2 * g1**2 + params.kappa1 * g2**2) / (2.0 * g0**2)
    return DarkMode(vector=v, lambda1=lam, mechanical_weight=float(abs(v[1]) ** 2))


def adiabatic_correction_norm(
    schedule: CouplingSchedule, params: SystemParams, t: float
) -> float:
    """Max-entry norm of (dU^-1/dt) U(t), the term dropped in the adiabatic limit.

    U^-1 is finite-differenced over h = 1e-5 * duration with continuity-tracked
    (and phase-aligned) eigenvector ordering, so the estimate is free of
    ordering and gauge jumps.
    """
    span = schedule.duration
    if not math.isfinite(span):
        span = max(t, 1.0)
    if not (0.0 < t < schedule.duration):
        raise SpectralError(f"t = {t} must be interior to (0, {schedule.duration})")
    h = 1e-5 * span
    t_lo = max(t - h, 0.0)
    t_hi = min(t + h, schedule.duration)
    es_lo = eigensystem(dynamic_matrix_at(params, schedule, t_lo))
    es_mid = eigensystem(dynamic_matrix_at(params, schedule, t), reference=es_lo)
    es_hi = eigensystem(dynamic_matrix_at(params, schedule, t_hi), reference=es_mid)
    dinv = (es_hi.inverse - es_lo.inverse) / (t_hi - t_lo)
    return float(np.max(np.abs(dinv @ es_mid.vectors)))
