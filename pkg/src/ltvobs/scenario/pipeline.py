"""Plant, frequency stage, amplitude stage and state observer on one grid.

Per grid step ``t -> t + h``:

1. the plant advances and records ``x(t + h)``;
2. the observer copy and fundamental matrix advance using ``theta_hat``
   built from the previous step's ``a_hat`` and ``omega_hat``;
3. once ``t + h >= d`` the delayed sample feeds the frequency regression,
   the amplitude regression (with ``chi`` from the previous ``omega_hat``)
   and, after ``t_switch``, the initial-error estimator.
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ltvobs.drem_id import DremState, build_regression, chi_eval, drem_step, theta_hat
from ltvobs.errors import DivergenceError
from ltvobs.freq_id import FreqIdState, freq_id_step
from ltvobs.gpebo import (GpeboState, commit_observer, delayed_regression, e_gradient_step,
                          finite_time_update, state_estimate)
from ltvobs.mathkit import rk4_step
from ltvobs.plant import commit_plant, init_plant, measure

NAN = float("nan")


@dataclass(slots=True)
class TraceRecord:
    t: float
    x: np.ndarray
    y: np.ndarray
    x_hat: np.ndarray
    theta: float
    theta_hat: float
    omega_hat: float = NAN
    k_hat: float = NAN
    a1_hat: float = NAN
    a2_hat: float = NAN
    Delta: float = NAN
    P: float = NAN
    w: float = NAN
    w_c: float = NAN
    v_floor_active: bool = False
    tc_reached: bool = False
    # in-memory diagnostics, not exported to CSV
    q: float = NAN
    phi: float = NAN
    Y: np.ndarray = None
    psi1: np.ndarray = None
    psi2: np.ndarray = None
    xi: np.ndarray = None
    Phi: np.ndarray = None
    e_hat: np.ndarray = None
    e_ft: np.ndarray = None

    @property
    def theta_err(self):
        return self.theta - self.theta_hat


@dataclass
class PipelineResult:
    """Records plus run-level facts that are not per-row."""

    records: list
    t_c: float = None
    omega_frozen: float = None
    gpebo_origin: float = 0.0
    extra: dict = field(default_factory=dict)


class _StageTable:
    """``A``, ``B``, ``u`` and ``theta`` sampled once on the half-step grid.

    Every RK4 stage of the plant and observer and every delayed lookup falls
    on a multiple of ``h / 2``, so index ``i`` holds the values at ``i h / 2``.
    """

    def __init__(self, spec, h, steps):
        ts = np.arange(2 * steps + 3) * (0.5 * h)
        self.A = np.array([spec.A(t) for t in ts])
        self.B = np.array([spec.B(t) for t in ts])
        self.u = np.array([spec.u(t) for t in ts])
        self.Bu = self.B * self.u[:, None]
        self.theta = np.array([spec.theta(t) for t in ts])


def _joint_step(tab, k, h, X, scales, n_forced):
    """RK4 step from grid index ``k`` of ``X' = A X + X diag(s) + Bu [1..1 0..0]``.

    The columns of ``X`` are the plant state, the observer copy and the
    columns of ``Phi``; they share ``A``, so one step advances all of them.
    ``scales[j]`` is the column scaling at stage time ``(2k + j) h / 2``.
    """
    i = 2 * k

    def f(j, Z):
        out = tab.A[i + j] @ Z
        out += Z * scales[j]
        out[:, :n_forced] += tab.Bu[i + j][:, None]
        return out

    half = 0.5 * h
    k1 = f(0, X)
    k2 = f(1, X + half * k1)
    k3 = f(1, X + half * k2)
    k4 = f(2, X + h * k3)
    X1 = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not math.isfinite(float(X1.sum())):
        raise DivergenceError((k + 1) * h, "plant or observer state")
    return X1


def _on_or_after(t, t0, h):
    return t >= t0 - 0.5 * h


def run(cfg):
    """Full pipeline; returns a :class:`PipelineResult`."""
    spec = cfg.build_system()
    n = spec.n
    h = cfg.h
    steps = int(round(cfg.horizon / h))
    d = spec.d
    lag = int(round(d / h))
    tab = _StageTable(spec, h, steps)
    nan_n = np.full(n, NAN)

    plant = init_plant(spec, h)
    fid = FreqIdState(lambda1=cfg.lambda1, gamma1=cfg.gamma1, v_floor=cfg.v_floor, h=h,
                      filter_init=cfg.filter_init)
    drem = DremState(n=n, lambda2=cfg.lambda2, lambda3=cfg.lambda3, gamma2=cfg.gamma2, h=h,
                     filter_init=cfg.filter_init)

    def new_observer(origin):
        return GpeboState(n=n, h=h, d=d, gamma3=cfg.gamma3, gamma_w=cfg.gamma_w, mu=cfg.mu,
                          origin=origin)

    obs_origin = cfg.t_switch if cfg.integrate_from_switch else 0.0
    obs = None if obs_origin > 0 else new_observer(0.0)
    obs_start = max(cfg.t_switch, obs_origin + d)
    obs_active = False
    omega_frozen = None

    def omega_used():
        if cfg.known_omega:
            return spec.omega
        if omega_frozen is not None:
            return omega_frozen
        return fid.omega_hat

    def make_theta_hat():
        if cfg.oracle_theta:
            return spec.theta
        a = drem.a_hat.copy()
        w = omega_used()
        return lambda t: theta_hat(a, w, t)

    records = []
    reg = None
    sample = None
    floored = False

    def record(t, y):
        est = state_estimate(obs) if obs is not None else None
        th_fn = make_theta_hat()
        records.append(TraceRecord(
            t=t,
            x=plant.x.copy(),
            y=nan_n if y is None else y,
            x_hat=nan_n if est is None else est.x_hat,
            theta=spec.theta(t),
            theta_hat=th_fn(t),
            omega_hat=omega_used(),
            k_hat=fid.k_hat,
            a1_hat=float(drem.a_hat[0]),
            a2_hat=float(drem.a_hat[1]),
            Delta=drem.Delta,
            P=obs_P,
            w=NAN if obs is None else obs.w,
            w_c=NAN if obs is None else obs.w_c,
            v_floor_active=floored,
            tc_reached=False if obs is None else obs.t_c_reached,
            q=NAN if sample is None else sample.q,
            phi=NAN if sample is None else sample.phi,
            Y=None if reg is None else reg.Y,
            psi1=None if reg is None else reg.psi1,
            psi2=None if reg is None else reg.psi2,
            xi=None if obs is None else obs.xi,
            Phi=None if obs is None else obs.Phi,
            e_hat=None if obs is None else obs.e_hat.copy(),
            e_ft=None if obs is None else obs.e_ft.copy(),
        ))

    obs_P = NAN
    record(0.0, measure(plant, d) if d == 0 else None)

    X = np.empty((n, 2 + n))
    for k in range(steps):
        t1 = (k + 1) * h
        try:
            X[:, 0] = plant.x
            if obs is None:
                scales = tab.theta[2 * k:2 * k + 3, None]
                X1 = _joint_step(tab, k, h, X[:, :1], scales, 1)
            else:
                X[:, 1] = obs.xi
                X[:, 2:] = obs.Phi
                scales = np.empty((3, 2 + n))
                scales[:, 0] = tab.theta[2 * k:2 * k + 3]
                if cfg.oracle_theta:
                    scales[:, 1:] = scales[:, :1]
                else:
                    th_fn = make_theta_hat()
                    t0 = k * h
                    scales[:, 1:] = [[th_fn(t0)], [th_fn(t0 + 0.5 * h)], [th_fn(t1)]]
                X1 = _joint_step(tab, k, h, X, scales, 2)
                commit_observer(obs, X1[:, 1].copy(), X1[:, 2:].copy())
            commit_plant(plant, X1[:, 0].copy())
            if obs is None and _on_or_after(t1, obs_origin, h) and obs_origin > 0:
                obs = new_observer(plant.t)

            y = None
            if k + 1 >= lag:
                y = measure(plant, d)
                j = 2 * (k + 1 - lag)
                A_d, B_d, u_d = tab.A[j], tab.B[j], tab.u[j]
                w_prev = omega_used()
                sample = freq_id_step(fid, y, A_d, B_d, u_d, t1)
                floored = sample.v_floor_active
                reg = build_regression(drem, y, A_d, B_d, u_d, chi_eval(w_prev, t1, d), t1)
                drem_step(drem, reg.Y1, reg.psi11, reg.psi21, t1)

                if (cfg.freeze_omega_at_switch and omega_frozen is None
                        and _on_or_after(t1, cfg.t_switch, h)):
                    omega_frozen = fid.omega_hat

                if obs is not None and _on_or_after(t1, obs_start, h):
                    if not obs_active:
                        obs.restart_estimator()
                        obs_active = True
                    _, obs_P, R = delayed_regression(obs, y, t1, d)
                    e_gradient_step(obs, obs_P, R)
                    finite_time_update(obs, obs_P)
        except DivergenceError as exc:
            if math.isnan(exc.t):
                raise DivergenceError(t1, exc.quantity) from None
            raise
        if (k + 1) % cfg.decimate == 0:
            record(t1, y)

    return PipelineResult(records=records, t_c=None if obs is None else obs.t_c,
                          omega_frozen=omega_frozen, gpebo_origin=obs_origin)


def run_pipeline(cfg):
    """Sequence of :class:`TraceRecord`, one per ``cfg.decimate`` grid steps."""
    return run(cfg).records


def oracle_simulate(cfg, substeps=None, rtol=1e-12, atol=1e-14):
    """High-accuracy plant-only reference trajectory on the decimated grid.

    By default the plant is integrated with an adaptive 8th-order method
    (DOP853) at tight tolerances. With ``substeps`` given, fixed-step RK4 at
    ``h / substeps`` is used instead.
    """
    spec = cfg.build_system()
    n = spec.n
    h = cfg.h
    steps = int(round(cfg.horizon / h))
    idx = np.arange(0, steps + 1, cfg.decimate)
    t_out = idx * h
    if substeps is None:
        sol = solve_ivp(spec.rhs, (0.0, t_out[-1]), spec.x0, method="DOP853", rtol=rtol,
                        atol=atol, dense_output=True)
        if not sol.success:
            raise DivergenceError(float(sol.t[-1]), "oracle plant state")
        xs = sol.sol(t_out).T

        def delayed(t):
            return sol.sol(t - spec.d) if t >= spec.d - 0.5 * h else None
    else:
        hs = h / substeps
        xs = np.empty((len(t_out), n))
        x = spec.x0.copy()
        j = 0
        fine = steps * substeps
        keep = {}
        for i in range(fine + 1):
            if i % substeps == 0:
                keep[i // substeps] = x
                if i % (substeps * cfg.decimate) == 0:
                    xs[j] = x
                    j += 1
            if i < fine:
                x = rk4_step(spec.rhs, i * hs, x, hs)
        lag = int(round(spec.d / h))

        def delayed(t):
            k = int(round(t / h)) - lag
            return keep.get(k) if k >= 0 else None

    records = []
    nan_n = np.full(n, NAN)
    for t, x in zip(t_out, xs):
        y = delayed(t) if spec.d > 0 else x
        records.append(TraceRecord(t=float(t), x=np.array(x), y=nan_n if y is None else np.array(y),
                                   x_hat=nan_n, theta=spec.theta(t), theta_hat=NAN))
    return records
