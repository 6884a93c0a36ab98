"""Exact Gaussian-state evolution under the three-mode Langevin dynamics.

The quantum Langevin equation i dv/dt = M(t) v + i sqrt(K) v_in is linear,
so Gaussian states stay Gaussian and are fully described by the mean
vector <v>, the normal-ordered central moments N[j,k] = <dv_j^+ dv_k>, and
the anomalous central moments A[j,k] = <dv_j dv_k>.  With delta-correlated
inputs (cavity baths at zero temperature, mechanical bath at occupation
n_th) the moment equations read

    d<v>/dt = -i M <v>
    dN/dt   =  i M* N - i N M + diag(0, gamma_m n_th, 0)
    dA/dt   = -i (M A + A M)

using M = M^T.  Quadrature covariances use the vacuum = identity
convention, x = a + a^+, p = -i(a - a^+).

Single-mode reductions feed the Gaussian Uhlmann fidelity, which is
cross-checked by an independent truncated Fock-basis oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .csvio import build_csv
from .model import CouplingSchedule, SystemParams

__all__ = [
    "GaussianError",
    "PhysicalityError",
    "SingleModeGaussian",
    "ThreeModeGaussianState",
    "MomentDerivative",
    "Trajectory",
    "make_squeezed_coherent",
    "embed_initial",
    "moment_rhs",
    "integrate",
    "reduce_to_mode",
    "quadrature_covariance",
    "gaussian_fidelity",
    "fock_oracle_fidelity",
    "trajectory_to_csv",
]


class GaussianError(ValueError):
    """Invalid Gaussian-state data or fidelity evaluation failure."""


class PhysicalityError(GaussianError):
    """A state violated the uncertainty relation beyond tolerance."""


_SYMPLECTIC_6 = np.kron(np.eye(3), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class SingleModeGaussian:
    """One bosonic mode: mean amplitude plus central second moments.

    n_ex = <da^+ da> (excess occupation), m_an = <da da>.
    """

    mean: complex
    n_ex: float
    m_an: complex

    def __post_init__(self) -> None:
        if self.n_ex < 0:
            raise GaussianError(f"n_ex must be non-negative, got {self.n_ex}")
        if self.n_ex * (self.n_ex + 1.0) < abs(self.m_an) ** 2 - 1e-10:
            raise PhysicalityError(
                f"unphysical moments: n(n+1) = {self.n_ex * (self.n_ex + 1):.6g} "
                f"< |m|^2 = {abs(self.m_an) ** 2:.6g}"
            )

    @property
    def covariance(self) -> np.ndarray:
        """2x2 quadrature covariance, vacuum = identity."""
        return np.array(
            [
                [1.0 + 2.0 * self.n_ex + 2.0 * self.m_an.real, 2.0 * self.m_an.imag],
                [2.0 * self.m_an.imag, 1.0 + 2.0 * self.n_ex - 2.0 * self.m_an.real],
            ]
        )

    @property
    def quadrature_mean(self) -> np.ndarray:
        return np.array([2.0 * self.mean.real, 2.0 * self.mean.imag])


def quadrature_covariance(normal: np.ndarray, anomalous: np.ndarray) -> np.ndarray:
    """6x6 symmetrized quadrature covariance from the (N, A) blocks."""
    sigma = np.empty((6, 6))
    for j in range(3):
        for k in range(3):
            njk, ajk = normal[j, k], anomalous[j, k]
            delta = 1.0 if j == k else 0.0
            sigma[2 * j, 2 * k] = 2.0 * ajk.real + 2.0 * njk.real + delta
            sigma[2 * j + 1, 2 * k + 1] = -2.0 * ajk.real + 2.0 * njk.real + delta
            sigma[2 * j, 2 * k + 1] = 2.0 * ajk.imag + 2.0 * njk.imag
            sigma[2 * j + 1, 2 * k] = 2.0 * ajk.imag - 2.0 * njk.imag
    return sigma


def _physicality_defect(normal: np.ndarray, anomalous: np.ndarray) -> float:
    sigma = quadrature_covariance(normal, anomalous)
    w = np.linalg.eigvalsh(sigma + 1j * _SYMPLECTIC_6)
    return float(w[0])


@dataclass(frozen=True, eq=False)
class ThreeModeGaussianState:
    """Gaussian state of (a1, bm, a2): means plus central N and A blocks."""

    mean: np.ndarray
    normal: np.ndarray
    anomalous: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=complex).reshape(3)
        normal = np.asarray(self.normal, dtype=complex).reshape(3, 3)
        anomalous = np.asarray(self.anomalous, dtype=complex).reshape(3, 3)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "anomalous", anomalous)
        scale = max(1.0, float(np.abs(normal).max()), float(np.abs(anomalous).max()))
        if np.abs(normal - normal.conj().T).max() > 1e-8 * scale:
            raise GaussianError("normal moment block must be Hermitian")
        if np.abs(anomalous - anomalous.T).max() > 1e-8 * scale:
            raise GaussianError("anomalous moment block must be symmetric")
        if normal.real.diagonal().min() < -1e-10 * scale:
            raise GaussianError("normal moments have a negative occupation")
        defect = _physicality_defect(normal, anomalous)
        if defect < -1e-8 * scale:
            raise PhysicalityError(
                f"covariance violates the uncertainty relation (defect {defect:.3e})"
            )


class MomentDerivative(NamedTuple):
    mean: np.ndarray
    normal: np.ndarray
    anomalous: np.ndarray


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled moment trajectory including both endpoints."""

    times: np.ndarray
    states: list[ThreeModeGaussianState]

    @property
    def final(self) -> ThreeModeGaussianState:
        return self.states[-1]


def make_squeezed_coherent(alpha: complex, r: float, phi: float = 0.0) -> SingleModeGaussian:
    """Displaced squeezed vacuum D(alpha) S(r e^{2i phi}) |0>.

    Central moments: n_ex = sinh^2 r, m_an = -e^{2i phi} sinh r cosh r
    (sign fixed against the Fock-basis construction).  r = 0 gives the
    coherent state |alpha>.
    """
    if r < 0:
        raise GaussianError("squeezing parameter r must be non-negative")
    return SingleModeGaussian(
        mean=complex(alpha),
        n_ex=math.sinh(r) ** 2,
        m_an=-np.exp(2j * phi) * math.sinh(r) * math.cosh(r),
    )


def embed_initial(
    state1: SingleModeGaussian, mech_occupation: float
) -> ThreeModeGaussianState:
    """Input state in a1, thermal mechanical mode, vacuum in a2, no correlations."""
    if mech_occupation < 0:
        raise GaussianError("mech_occupation must be non-negative")
    mean = np.array([state1.mean, 0.0, 0.0], dtype=complex)
    normal = np.zeros((3, 3), dtype=complex)
    anomalous = np.zeros((3, 3), dtype=complex)
    normal[0, 0] = state1.n_ex
    normal[1, 1] = mech_occupation
    anomalous[0, 0] = state1.m_an
    return ThreeModeGaussianState(mean=mean, normal=normal, anomalous=anomalous)


def _matrix_at(params: SystemParams, schedule: CouplingSchedule, t: float) -> np.ndarray:
    # RK4 stage times may overshoot the schedule end by rounding; clamp
    g1, g2 = schedule.values(min(max(t, 0.0), schedule.duration))
    return np.array(
        [
            [-0.5j * params.kappa1, g1, 0.0],
            [g1, -0.5j * params.gamma_m, g2],
            [0.0, g2, -0.5j * params.kappa2],
        ],
        dtype=complex,
    )


def _rhs(
    t: float,
    mean: np.ndarray,
    normal: np.ndarray,
    anomalous: np.ndarray,
    params: SystemParams,
    schedule: CouplingSchedule,
    diffusion: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = _matrix_at(params, schedule, t)
    dmean = -1j * (m @ mean)
    dnormal = 1j * (m.conj() @ normal) - 1j * (normal @ m) + diffusion
    danomalous = -1j * (m @ anomalous + anomalous @ m)
    return dmean, dnormal, danomalous


def moment_rhs(
    t: float,
    state: ThreeModeGaussianState,
    params: SystemParams,
    schedule: CouplingSchedule,
) -> MomentDerivative:
    """Time derivative of (mean, N, A) under the Langevin moment equations."""
    diffusion = np.zeros((3, 3), dtype=complex)
    diffusion[1, 1] = params.gamma_m * params.n_th
    d = _rhs(t, state.mean, state.normal, state.anomalous, params, schedule, diffusion)
    return MomentDerivative(*d)


def _default_step(
    params: SystemParams, schedule: CouplingSchedule, t_final: float
) -> float:
    g_max = 0.0
    for k in range(257):
        t = t_final * k / 256.0
        g1, g2 = schedule.values(t)
        g_max = max(g_max, abs(g1), abs(g2))
    rate = max(params.kappa1, params.kappa2, params.gamma_m, g_max)
    h = min(t_final / 2000.0, 0.01)
    if rate > 0:
        # the extra 0.01/rate term keeps the RK4 defect (rate*h)^4 below the
        # 1e-8 physicality tolerance for pure states on long runs
        h = min(h, 0.1 / rate, 0.01 / rate)
    return h


def integrate(
    state0: ThreeModeGaussianState,
    params: SystemParams,
    schedule: CouplingSchedule,
    t_final: float,
    max_step: float | None = None,
    n_samples: int = 201,
) -> Trajectory:
    """Fixed-step RK4 integration of the moment equations.

    The step is h = min(T/2000, 0.01, 0.1/max(kappa, gamma_m, g)), optionally
    capped by max_step; fixed stepping keeps trajectories reproducible.
    N and A are re-symmetrized after every step and physicality is
    re-validated at each recorded sample.
    """
    if t_final <= 0:
        raise GaussianError("t_final must be positive")
    h = _default_step(params, schedule, t_final)
    if max_step is not None:
        h = min(h, max_step)
    n_steps = max(1, math.ceil(t_final / h))
    h = t_final / n_steps

    diffusion = np.zeros((3, 3), dtype=complex)
    diffusion[1, 1] = params.gamma_m * params.n_th

    record_every = max(1, n_steps // max(1, n_samples - 1))
    mean = state0.mean.copy()
    normal = state0.normal.copy()
    anomalous = state0.anomalous.copy()

    times = [0.0]
    states = [state0]

    def snapshot(t: float) -> None:
        state = ThreeModeGaussianState(
            mean=mean.copy(), normal=normal.copy(), anomalous=anomalous.copy()
        )
        times.append(t)
        states.append(state)

    for k in range(n_steps):
        t = k * h
        k1 = _rhs(t, mean, normal, anomalous, params, schedule, diffusion)
        k2 = _rhs(
            t + 0.5 * h,
            mean + 0.5 * h * k1[0],
            normal + 0.5 * h * k1[1],
            anomalous + 0.5 * h * k1[2],
            params,
            schedule,
            diffusion,
        )
        k3 = _rhs(
            t + 0.5 * h,
            mean + 0.5 * h * k2[0],
            normal + 0.5 * h * k2[1],
            anomalous + 0.5 * h * k2[2],
            params,
            schedule,
            diffusion,
        )
        k4 = _rhs(
            t + h,
            mean + h * k3[0],
            normal + h * k3[1],
            anomalous + h * k3[2],
            params,
            schedule,
            diffusion,
        )
        mean = mean + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        normal = normal + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        anomalous = anomalous + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        normal = 0.5 * (normal + normal.conj().T)
        anomalous = 0.5 * (anomalous + anomalous.T)
        if (k + 1) % record_every == 0 and k + 1 < n_steps:
            try:
                snapshot((k + 1) * h)
            except PhysicalityError as exc:
                raise PhysicalityError(
                    f"physicality violation at t = {(k + 1) * h:.6g}: {exc}"
                ) from exc
    try:
        snapshot(t_final)
    except PhysicalityError as exc:
        raise PhysicalityError(f"physicality violation at t = {t_final:.6g}: {exc}") from exc
    return Trajectory(times=np.array(times), states=states)


def reduce_to_mode(state: ThreeModeGaussianState, index: int) -> SingleModeGaussian:
    """Single-mode reduction; index is 1-based (1 = a1, 2 = bm, 3 = a2)."""
    if index not in (1, 2, 3):
        raise GaussianError(f"mode index must be 1, 2 or 3, got {index}")
    i = index - 1
    return SingleModeGaussian(
        mean=complex(state.mean[i]),
        n_ex=max(float(state.normal[i, i].real), 0.0),
        m_an=complex(state.anomalous[i, i]),
    )


def gaussian_fidelity(s1: SingleModeGaussian, s2: SingleModeGaussian) -> float:
    """Single-mode Uhlmann fidelity from the 2x2 covariances.

    F = 2 exp(-delta^T (sigma1+sigma2)^-1 delta / 2) / (sqrt(Delta+Lambda) - sqrt(Lambda))
    with Delta = det(sigma1+sigma2), Lambda = (det sigma1 - 1)(det sigma2 - 1);
    validated against the Fock-basis oracle.
    """
    sig1, sig2 = s1.covariance, s2.covariance
    total = sig1 + sig2
    det_total = float(np.linalg.det(total))
    if det_total < 1e-300:
        raise GaussianError("sigma1 + sigma2 is numerically singular")
    lam = (float(np.linalg.det(sig1)) - 1.0) * (float(np.linalg.det(sig2)) - 1.0)
    lam = max(lam, 0.0)
    delta = s1.quadrature_mean - s2.quadrature_mean
    expo = -0.5 * float(delta @ np.linalg.solve(total, delta))
    fid = 2.0 * math.exp(expo) / (math.sqrt(det_total + lam) - math.sqrt(lam))
    return min(max(fid, 0.0), 1.0)


def _squeezed_thermal_split(s: SingleModeGaussian) -> tuple[float, float, complex]:
    """Decompose central moments into (nbar, r, squeeze phase factor e^{2i phi})."""
    nu_sq = (2.0 * s.n_ex + 1.0) ** 2 - 4.0 * abs(s.m_an) ** 2
    nu = math.sqrt(max(nu_sq, 1.0))
    nbar = 0.5 * (nu - 1.0)
    r = 0.5 * math.asinh(2.0 * abs(s.m_an) / nu)
    phase = -s.m_an / abs(s.m_an) if abs(s.m_an) > 0 else complex(1.0)
    return nbar, r, phase


def _fock_density(s: SingleModeGaussian, cutoff: int) -> tuple[np.ndarray, float]:
    """Truncated density matrix in the number basis plus its trace deficit.

    Built as D(alpha) S(eps) rho_th S^+ D^+ in a padded working space; the
    generators are anti-Hermitian so the truncated operators are exactly
    unitary and all truncation loss shows up in the returned block's trace.
    """
    nbar, r, phase = _squeezed_thermal_split(s)
    dim = cutoff + max(16, cutoff // 2)
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)
    raise_ = lower.conj().T
    if nbar > 0:
        ks = np.arange(dim)
        diag = np.exp(ks * math.log(nbar / (nbar + 1.0))) / (nbar + 1.0)
    else:
        diag = np.zeros(dim)
        diag[0] = 1.0
    rho = np.diag(diag).astype(complex)
    if r > 0:
        eps = r * phase
        squeeze = expm((np.conj(eps) * (lower @ lower) - eps * (raise_ @ raise_)) / 2.0)
        rho = squeeze @ rho @ squeeze.conj().T
    if s.mean != 0:
        disp = expm(s.mean * raise_ - np.conj(s.mean) * lower)
        rho = disp @ rho @ disp.conj().T
    block = rho[:cutoff, :cutoff]
    deficit = abs(1.0 - float(np.trace(block).real))
    return block, deficit


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _rule_cutoff(s: SingleModeGaussian) -> int:
    _, r, _ = _squeezed_thermal_split(s)
    a = abs(s.mean)
    return math.ceil(4.0 * (a * a + 10.0 * a + 20.0 * math.sinh(r) ** 2 + 10.0 * s.n_ex))


def fock_oracle_fidelity(
    s1: SingleModeGaussian, s2: SingleModeGaussian, cutoff: int | None = None
) -> float:
    """Uhlmann fidelity by explicit truncated Fock-basis density matrices.

    Independent of the covariance formula; used to certify it.  The cutoff
    starts from a size heuristic (or the given value) and doubles until both
    truncated matrices have trace deficit below 1e-10; beyond 4096 the
    evaluation is abandoned.
    """
    n = cutoff if cutoff is not None else max(16, _rule_cutoff(s1), _rule_cutoff(s2))
    while True:
        if n > 4096:
            raise GaussianError("Fock cutoff 4096 insufficient for trace deficit 1e-10")
        rho1, d1 = _fock_density(s1, n)
        rho2, d2 = _fock_density(s2, n)
        if d1 < 1e-10 and d2 < 1e-10:
            break
        n *= 2
    root = _psd_sqrt(rho1)
    inner = _psd_sqrt(root @ rho2 @ root)
    fid = float(np.trace(inner).real) ** 2
    return min(max(fid, 0.0), 1.0)


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV text: t, Re/Im of all means, N diagonal, Re/Im of the A diagonal."""
    header = ["t"]
    for name in ("a1", "bm", "a2"):
        header += [f"re_{name}", f"im_{name}"]
    header += ["n_a1", "n_bm", "n_a2"]
    for name in ("a1", "bm", "a2"):
        header += [f"re_m_{name}", f"im_m_{name}"]
    rows = []
    for t, st in zip(traj.times, traj.states):
        row = [float(t)]
        for i in range(3):
            row += [float(st.mean[i].real), float(st.mean[i].imag)]
        row += [float(st.normal[i, i].real) for i in range(3)]
        for i in range(3):
            row += [float(st.anomalous[i, i].real), float(st.anomalous[i, i].imag)]
        rows.append(row)
    return build_csv(header, rows)
