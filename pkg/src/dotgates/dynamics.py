"""Time evolution, trajectories, and phase bookkeeping.

Two integrators are provided: :func:`evolve_schrodinger` for pure states
and :func:`evolve_lindblad` for density matrices with collapse channels.
Both wrap an adaptive high-order Runge-Kutta scheme (DOP853) and store the
solution on a regular sample grid.  Pulse discontinuities should be passed
as ``breakpoints`` so the integration restarts there instead of stepping
across a kink.

:func:`evolve_expm` is the deliberately simple reference propagator; it is
exact for piecewise-constant Hamiltonians and is what the regression tests
check the adaptive integrators against.

Phase extraction (:func:`accumulated_phase`) unwraps the complex argument
of one amplitude along a trajectory.  Samples with magnitude below a floor
carry no usable phase; they are linearly interpolated and flagged, and a
series that is mostly below the floor raises :class:`PhaseUndefinedError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .operators import (
    HBAR_MEV_PS,
    LAB_FRAME,
    Basis,
    BasisMismatchError,
    DensityMatrix,
    OperatorMatrix,
    QuantumState,
    rotating_frame_tag,
)

__all__ = [
    "IntegratorConfig",
    "IntegrationError",
    "PhaseUndefinedError",
    "Trajectory",
    "CollapseChannel",
    "evolve_schrodinger",
    "evolve_lindblad",
    "evolve_expm",
    "PhaseSeries",
    "accumulated_phase",
    "to_rotating_frame",
    "to_lab_frame",
    "concatenate_trajectories",
]

# Norm/trace conservation expected from the integrator at default tolerances.
_FINAL_DRIFT_TOL = 1e-7
_ANY_DRIFT_TOL = 1e-6
_POSITIVITY_TOL = 1e-6

#: amplitudes below this magnitude carry no numerically meaningful phase
PHASE_FLOOR = 1e-10


class IntegrationError(RuntimeError):
    """The ODE solver failed or violated a conservation check."""


class PhaseUndefinedError(ValueError):
    """Too much of an amplitude series sits below the phase floor."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Numerical knobs shared by both integrators.

    ``sample_interval`` controls only how densely the solution is stored;
    step size is governed by the error tolerances.
    """

    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = math.inf
    sample_interval: float = 0.01
    method: str = "DOP853"

    def __post_init__(self) -> None:
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")


@dataclass(frozen=True)
class CollapseChannel:
    """A Lindblad jump operator with rate in 1/ps."""

    operator: Any  # OperatorMatrix or ndarray
    rate: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError("collapse rate must be >= 0")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled evolution: times plus states, tied to a basis and frame.

    ``kind`` is ``"pure"`` (states shaped ``(n, d)``) or ``"density"``
    (``(n, d, d)``).
    """

    times: np.ndarray
    states: np.ndarray
    basis: Basis
    frame: str
    kind: str = "pure"
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        t = np.array(self.times, dtype=float)
        s = np.array(self.states, dtype=complex)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a nonempty 1-d array")
        if self.kind == "pure":
            if s.ndim != 2 or s.shape != (t.size, self.basis.dim):
                raise ValueError(f"pure states must have shape (n, d), got {s.shape}")
        elif self.kind == "density":
            d = self.basis.dim
            if s.ndim != 3 or s.shape != (t.size, d, d):
                raise ValueError(f"density states must have shape (n, d, d), got {s.shape}")
        else:
            raise ValueError(f"kind must be 'pure' or 'density', got {self.kind!r}")
        if t.size > 1:
            dt = np.diff(t)
            if not (np.all(dt > 0) or np.all(dt < 0)):
                raise ValueError("times must be strictly monotone")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def amplitude(self, label: str) -> np.ndarray:
        if self.kind != "pure":
            raise ValueError("amplitudes exist only for pure-state trajectories")
        return self.states[:, self.basis.index(label)]

    def population(self, label: str) -> np.ndarray:
        i = self.basis.index(label)
        if self.kind == "pure":
            return np.abs(self.states[:, i]) ** 2
        return self.states[:, i, i].real

    def populations(self) -> dict[str, np.ndarray]:
        return {lbl: self.population(lbl) for lbl in self.basis.labels}

    def norms(self) -> np.ndarray:
        if self.kind != "pure":
            raise ValueError("norms exist only for pure-state trajectories")
        return np.linalg.norm(self.states, axis=1)

    def traces(self) -> np.ndarray:
        if self.kind != "density":
            raise ValueError("traces exist only for density trajectories")
        return np.einsum("nii->n", self.states).real

    def min_eigenvalue(self) -> float:
        if self.kind != "density":
            raise ValueError("eigenvalue check applies to density trajectories")
        sym = 0.5 * (self.states + np.conj(np.swapaxes(self.states, 1, 2)))
        return float(np.min(np.linalg.eigvalsh(sym)))

    def final_state(self) -> QuantumState | DensityMatrix:
        if self.kind == "pure":
            return QuantumState(self.states[-1], self.basis, self.frame)
        return DensityMatrix(self.states[-1], self.basis, self.frame)

    def final_amplitude(self, label: str) -> complex:
        return complex(self.amplitude(label)[-1])


def _as_matrix_fn(h: Any, basis: Basis, frame: str,
                  t_probe: float) -> Callable[[float], np.ndarray]:
    """Normalize constant/callable Hamiltonian inputs to ``t -> ndarray``."""
    d = basis.dim

    def check_shape(m: np.ndarray) -> None:
        if m.shape != (d, d):
            raise BasisMismatchError(f"Hamiltonian shape {m.shape} != ({d}, {d})")

    if isinstance(h, OperatorMatrix):
        if h.basis.labels != basis.labels or h.frame != frame:
            raise BasisMismatchError("Hamiltonian and state disagree on basis or frame")
        m = h.matrix
        return lambda t: m
    if isinstance(h, np.ndarray):
        m = np.asarray(h, dtype=complex)
        check_shape(m)
        return lambda t: m
    if callable(h):
        sample = h(t_probe)
        if isinstance(sample, OperatorMatrix):
            if sample.basis.labels != basis.labels or sample.frame != frame:
                raise BasisMismatchError("Hamiltonian and state disagree on basis or frame")
            return lambda t: h(t).matrix
        check_shape(np.asarray(sample))
        return h
    raise TypeError(f"cannot interpret {type(h).__name__} as a Hamiltonian")


def _sample_grid(t0: float, t1: float, dt: float,
                 breakpoints: Sequence[float]) -> tuple[np.ndarray, list[float]]:
    """Sample grid from t0 to t1 plus the interior breakpoints, in order."""
    forward = t1 > t0
    lo, hi = (t0, t1) if forward else (t1, t0)
    interior = sorted({float(b) for b in breakpoints if lo < float(b) < hi})
    n = max(1, int(math.ceil((hi - lo) / dt)))
    grid = np.linspace(lo, hi, n + 1)
    if interior:
        grid = np.unique(np.concatenate([grid, np.asarray(interior)]))
    if not forward:
        grid = grid[::-1].copy()
        interior = interior[::-1]
    return grid, interior


def _integrate(rhs: Callable, y0: np.ndarray, t0: float, t1: float,
               cfg: IntegratorConfig, breakpoints: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    grid, interior = _sample_grid(t0, t1, cfg.sample_interval, breakpoints)
    states = np.empty((grid.size, y0.size), dtype=complex)
    states[0] = y0
    y = y0
    pos = 1
    knots = [t0, *interior, t1]
    forward = t1 > t0
    for a, b in zip(knots[:-1], knots[1:]):
        mask = ((grid > a) & (grid <= b)) if forward else ((grid < a) & (grid >= b))
        pts = grid[mask]
        sol = solve_ivp(rhs, (a, b), y, method=cfg.method, t_eval=pts,
                        rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step)
        if not sol.success:
            raise IntegrationError(f"solver failed on [{a:g}, {b:g}]: {sol.message}")
        states[pos:pos + pts.size] = sol.y.T
        pos += pts.size
        y = states[pos - 1]
    return grid, states


def evolve_schrodinger(h_of_t: Any, state: QuantumState, t_span: tuple[float, float],
                       config: IntegratorConfig | None = None,
                       breakpoints: Sequence[float] = ()) -> Trajectory:
    """Integrate ``i hbar dpsi/dt = H(t) psi`` over ``t_span``.

    ``t_span`` may run backwards for time-reversed evolution.  Raises
    :class:`IntegrationError` when the solver fails or the final norm
    drifts by more than ``1e-7``.
    """
    cfg = config or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    psi0 = state.amplitudes.astype(complex)
    hfun = _as_matrix_fn(h_of_t, state.basis, state.frame, t0)
    if t0 == t1:
        return Trajectory(np.array([t0]), psi0[None, :], state.basis, state.frame, "pure")

    scale = -1j / HBAR_MEV_PS

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return scale * (hfun(t) @ y)

    times, states = _integrate(rhs, psi0, t0, t1, cfg, breakpoints)
    norms = np.linalg.norm(states, axis=1)
    drift = np.abs(norms - 1.0)
    if drift[-1] > _FINAL_DRIFT_TOL or np.max(drift) > _ANY_DRIFT_TOL:
        raise IntegrationError(
            f"norm drifted by {np.max(drift):.3e}; tighten rtol/atol or shrink max_step"
        )
    return Trajectory(times, states, state.basis, state.frame, "pure")


def evolve_lindblad(h_of_t: Any, rho0: DensityMatrix, t_span: tuple[float, float],
                    channels: Sequence[CollapseChannel] = (),
                    config: IntegratorConfig | None = None,
                    breakpoints: Sequence[float] = ()) -> Trajectory:
    """Integrate the Lindblad master equation for ``rho0`` over ``t_span``.

    Collapse terms use rates in 1/ps and are not divided by hbar.  The
    final trace must stay within ``1e-7`` of one and eigenvalues above
    ``-1e-6`` or :class:`IntegrationError` is raised.
    """
    cfg = config or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    d = rho0.basis.dim
    hfun = _as_matrix_fn(h_of_t, rho0.basis, rho0.frame, t0)
    ops: list[tuple[np.ndarray, np.ndarray, np.ndarray, float]] = []
    for ch in channels:
        L = ch.operator.matrix if isinstance(ch.operator, OperatorMatrix) else np.asarray(
            ch.operator, dtype=complex)
        if L.shape != (d, d):
            raise BasisMismatchError(f"collapse operator shape {L.shape} != ({d}, {d})")
        if ch.rate > 0:
            Ld = L.conj().T
            ops.append((L, Ld, Ld @ L, float(ch.rate)))

    if t0 == t1:
        return Trajectory(np.array([t0]), rho0.matrix[None, :, :], rho0.basis,
                          rho0.frame, "density")

    scale = -1j / HBAR_MEV_PS

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        rho = y.reshape(d, d)
        h = hfun(t)
        drho = scale * (h @ rho - rho @ h)
        for L, Ld, LdL, g in ops:
            drho = drho + g * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
        return drho.ravel()

    times, flat = _integrate(rhs, rho0.matrix.ravel(), t0, t1, cfg, breakpoints)
    states = flat.reshape(times.size, d, d)
    traj = Trajectory(times, states, rho0.basis, rho0.frame, "density")
    drift = np.abs(traj.traces() - 1.0)
    if drift[-1] > _FINAL_DRIFT_TOL or np.max(drift) > _ANY_DRIFT_TOL:
        raise IntegrationError(
            f"trace drifted by {np.max(drift):.3e}; tighten rtol/atol or shrink max_step"
        )
    lo = traj.min_eigenvalue()
    if lo < -_POSITIVITY_TOL:
        raise IntegrationError(f"density matrix lost positivity: min eigenvalue {lo:.3e}")
    return traj


def _expm_step(m: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * w * dt / HBAR_MEV_PS)) @ v.conj().T


def evolve_expm(h_of_t: Any, state: QuantumState, t_grid: Sequence[float]) -> Trajectory:
    """Propagate by exact matrix exponentials on each cell of ``t_grid``.

    The Hamiltonian is sampled at cell midpoints, so the result is exact
    whenever ``H`` is constant between consecutive grid points.  This is
    the reference propagator the adaptive integrator is tested against.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("t_grid must be a nonempty 1-d sequence")
    hfun = _as_matrix_fn(h_of_t, state.basis, state.frame, float(times[0]))
    states = np.empty((times.size, state.basis.dim), dtype=complex)
    states[0] = state.amplitudes
    for i in range(1, times.size):
        dt = float(times[i] - times[i - 1])
        mid = 0.5 * (times[i] + times[i - 1])
        states[i] = _expm_step(hfun(float(mid)), dt) @ states[i - 1]
    return Trajectory(times, states, state.basis, state.frame, "pure")


@dataclass(frozen=True, eq=False)
class PhaseSeries:
    """Unwrapped phase of one amplitude along a trajectory.

    ``interpolated`` marks samples whose magnitude was below the floor
    (their phase is filled in linearly); ``jump_mask`` marks intervals
    where the unwrapped phase moved by more than pi/2 between samples,
    which usually means the sampling is too coarse to trust continuity.
    """

    times: np.ndarray
    values: np.ndarray
    interpolated: np.ndarray
    jump_mask: np.ndarray
    label: str
    floor: float

    def __post_init__(self) -> None:
        for name in ("times", "values", "interpolated", "jump_mask"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def final(self) -> float:
        return float(self.values[-1])

    @property
    def max_jump(self) -> float:
        if self.jump_mask.size == 0:
            return 0.0
        return float(np.max(np.abs(np.diff(self.values))))

    @property
    def any_jump_flag(self) -> bool:
        return bool(np.any(self.jump_mask))


def accumulated_phase(traj: Trajectory, label: str,
                      floor: float = PHASE_FLOOR) -> PhaseSeries:
    """Unwrapped phase of ``traj.amplitude(label)`` versus time.

    Raises :class:`PhaseUndefinedError` when fewer than two samples, or
    less than half of them, sit above the magnitude floor.
    """
    if traj.times.size > 1 and traj.times[0] > traj.times[-1]:
        raise ValueError("phase accumulation expects a forward-time trajectory")
    amp = traj.amplitude(label)
    defined = np.abs(amp) >= floor
    n_def = int(np.count_nonzero(defined))
    if n_def < 2:
        raise PhaseUndefinedError(
            f"amplitude {label!r} has {n_def} samples above the floor {floor:g}; "
            "no phase can be tracked"
        )
    if n_def < 0.5 * amp.size:
        raise PhaseUndefinedError(
            f"amplitude {label!r} sits below the floor {floor:g} for "
            f"{amp.size - n_def} of {amp.size} samples; phase is undefined "
            "over most of the window"
        )
    unwrapped = np.unwrap(np.angle(amp[defined]))
    values = np.interp(traj.times, traj.times[defined], unwrapped)
    # pin the defined samples exactly (interp can round)
    values[defined] = unwrapped
    jumps = np.abs(np.diff(values))
    return PhaseSeries(
        times=traj.times.copy(),
        values=values,
        interpolated=~defined,
        jump_mask=jumps > (math.pi / 2.0),
        label=label,
        floor=floor,
    )


def _frame_factors(times: np.ndarray, omega_l: float,
                   excitations: Sequence[int], sign: float) -> np.ndarray:
    n = np.asarray(excitations, dtype=float)
    return np.exp(sign * 1j * omega_l * np.outer(times, n) / HBAR_MEV_PS)


def to_rotating_frame(traj: Trajectory, omega_l: float,
                      excitations: Sequence[int]) -> Trajectory:
    """Map a lab-frame trajectory into the frame rotating at ``omega_l``.

    ``excitations`` lists the exciton number of each basis state, in basis
    order; each amplitude picks up ``exp(+i omega_l n t / hbar)``.
    """
    if traj.frame != LAB_FRAME:
        raise BasisMismatchError(f"expected a lab-frame trajectory, got {traj.frame!r}")
    if len(excitations) != traj.basis.dim:
        raise ValueError("need one excitation number per basis state")
    f = _frame_factors(traj.times, omega_l, excitations, +1.0)
    if traj.kind == "pure":
        states = traj.states * f
    else:
        states = traj.states * f[:, :, None] * f[:, None, :].conj()
    return Trajectory(traj.times, states, traj.basis, rotating_frame_tag(omega_l),
                      traj.kind, dict(traj.metadata))


def to_lab_frame(traj: Trajectory, omega_l: float,
                 excitations: Sequence[int]) -> Trajectory:
    """Inverse of :func:`to_rotating_frame`."""
    expected = rotating_frame_tag(omega_l)
    if traj.frame != expected:
        raise BasisMismatchError(f"expected frame {expected!r}, got {traj.frame!r}")
    if len(excitations) != traj.basis.dim:
        raise ValueError("need one excitation number per basis state")
    f = _frame_factors(traj.times, omega_l, excitations, -1.0)
    if traj.kind == "pure":
        states = traj.states * f
    else:
        states = traj.states * f[:, :, None] * f[:, None, :].conj()
    return Trajectory(traj.times, states, traj.basis, LAB_FRAME, traj.kind,
                      dict(traj.metadata))


def concatenate_trajectories(parts: Sequence[Trajectory]) -> Trajectory:
    """Join consecutive trajectory segments into one.

    Segments must share basis, frame, and kind, and each must start where
    the previous one ended (the duplicated junction sample is dropped).
    """
    if not parts:
        raise ValueError("nothing to concatenate")
    first = parts[0]
    times = [first.times]
    states = [first.states]
    for prev, cur in zip(parts[:-1], parts[1:]):
        if cur.basis.labels != first.basis.labels or cur.frame != first.frame \
                or cur.kind != first.kind:
            raise BasisMismatchError("trajectory segments disagree on basis, frame, or kind")
        skip = 1 if cur.times[0] == prev.times[-1] else 0
        if cur.times[skip if skip < cur.times.size else -1] < prev.times[-1]:
            raise ValueError("trajectory segments overlap in time")
        times.append(cur.times[skip:])
        states.append(cur.states[skip:])
    meta: dict[str, Any] = {}
    for part in parts:
        meta.update(part.metadata)
    return Trajectory(np.concatenate(times), np.concatenate(states, axis=0),
                      first.basis, first.frame, first.kind, meta)
