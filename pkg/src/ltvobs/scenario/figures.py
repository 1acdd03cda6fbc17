"""Figure registry: which runs each transient figure needs and what it plots."""

import math
from dataclasses import dataclass, field

import numpy as np

GAINS = (1.0, 10.0, 100.0)


def omega_err(records, cfg):
    return np.array([cfg.omega - r.omega_hat for r in records])


def a1_err(records, cfg):
    return np.array([cfg.a1 - r.a1_hat for r in records])


def a2_err(records, cfg):
    return np.array([cfg.a2 - r.a2_hat for r in records])


def theta_err(records, cfg):
    return np.array([r.theta_err for r in records])


QUANTITIES = {
    "omega": (omega_err, r"$\tilde\omega = \omega - \hat\omega$"),
    "a1": (a1_err, r"$\tilde a_1 = a_1 - \hat a_1$"),
    "a2": (a2_err, r"$\tilde a_2 = a_2 - \hat a_2$"),
    "theta": (theta_err, r"$\tilde\theta = \theta - \hat\theta$"),
}

# gain swept by each error quantity in the ordering checks
SWEPT_BY = {"omega": "gamma1", "a1": "gamma2", "a2": "gamma2", "theta": "gamma2"}


@dataclass(frozen=True)
class FigureSpec:
    title: str
    kind: str  # "sweep", "initial_error" or "state"
    d: float
    quantity: str = None
    gain: str = None
    overrides: dict = field(default_factory=dict)

    def configs(self, base, d=None):
        cfg = base.replace(d=self.d if d is None else d, **self.overrides)
        if self.kind != "sweep":
            return [("", cfg)]
        return [(f"{self.gain} = {g:g}", cfg.replace(**{self.gain: g})) for g in GAINS]


FIGURES = {
    1: FigureSpec("frequency error, gamma1 sweep, no delay", "sweep", 0.0, "omega", "gamma1"),
    2: FigureSpec("a1 error, known omega, no delay", "sweep", 0.0, "a1", "gamma2",
                  {"known_omega": True}),
    3: FigureSpec("a2 error, known omega, no delay", "sweep", 0.0, "a2", "gamma2",
                  {"known_omega": True}),
    4: FigureSpec("a1 error, estimated omega, no delay", "sweep", 0.0, "a1", "gamma2",
                  {"gamma1": 10.0}),
    5: FigureSpec("a2 error, estimated omega, no delay", "sweep", 0.0, "a2", "gamma2",
                  {"gamma1": 10.0}),
    6: FigureSpec("theta error, no delay", "sweep", 0.0, "theta", "gamma2", {"gamma1": 10.0}),
    7: FigureSpec("frequency error, gamma1 sweep, d = 2", "sweep", 2.0, "omega", "gamma1"),
    8: FigureSpec("a1 error, estimated omega, d = 2", "sweep", 2.0, "a1", "gamma2",
                  {"gamma1": 10.0}),
    9: FigureSpec("a2 error, estimated omega, d = 2", "sweep", 2.0, "a2", "gamma2",
                  {"gamma1": 10.0}),
    10: FigureSpec("theta error, d = 2", "sweep", 2.0, "theta", "gamma2", {"gamma1": 10.0}),
    11: FigureSpec("initial-error estimates, gradient and finite-time, d = 2", "initial_error",
                   2.0, overrides={"gamma1": 10.0}),
    12: FigureSpec("state and finite-time estimate, d = 2", "state", 2.0,
                   overrides={"gamma1": 10.0}),
}


def settling_time(t, err, band=0.05):
    """First time after which ``|err|`` stays within ``band``; ``inf`` if never."""
    t = np.asarray(t)
    outside = np.nonzero(np.abs(np.asarray(err)) > band)[0]
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    return float(t[last + 1]) if last + 1 < t.size else math.inf


def _stack(records, attr, n):
    return np.array([getattr(r, attr) if getattr(r, attr) is not None else np.full(n, np.nan)
                     for r in records])


def render(fig_id, runs, path):
    """Draw figure ``fig_id`` from ``[(label, cfg, records), ...]`` into ``path``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    spec = FIGURES[fig_id]
    if spec.kind == "sweep":
        fn, ylabel = QUANTITIES[spec.quantity]
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        for label, cfg, records in runs:
            t = np.array([r.t for r in records])
            ax.plot(t, fn(records, cfg), lw=1.0, label=label)
        ax.set_ylabel(ylabel)
        ax.legend(frameon=False)
        axes = [ax]
    else:
        _, cfg, records = runs[0]
        t = np.array([r.t for r in records])
        n = len(records[0].x)
        fig, axes = plt.subplots(n, 1, sharex=True, figsize=(6.4, 2.2 * n))
        axes = np.atleast_1d(axes)
        if spec.kind == "initial_error":
            e = _stack(records, "e_hat", n)
            eft = _stack(records, "e_ft", n)
            for i, ax in enumerate(axes):
                ax.plot(t, e[:, i], lw=1.0, label="gradient")
                ax.plot(t, eft[:, i], lw=1.0, ls="--", label="finite-time")
                ax.set_ylabel(rf"$\hat e_{i + 1}$")
        else:
            x = _stack(records, "x", n)
            xh = _stack(records, "x_hat", n)
            for i, ax in enumerate(axes):
                ax.plot(t, x[:, i], lw=1.0, label="x")
                ax.plot(t, xh[:, i], lw=1.0, ls="--", label=r"$\hat x$")
                ax.set_ylabel(rf"$x_{i + 1}$")
        axes[0].legend(frameon=False)
    axes[-1].set_xlabel("t, s")
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.suptitle(spec.title, fontsize="medium")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_trace_csv(csv_path, png_path):
    """Quick-look panels straight from an exported CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from ltvobs.scenario.csvio import read_csv

    data = read_csv(csv_path)
    t = np.array(data["t"])
    n = sum(1 for c in data if c.startswith("xhat"))
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6.4, 7.0))
    for i in range(n):
        axes[0].plot(t, data[f"x{i + 1}"], lw=1.0, label=f"x{i + 1}")
        axes[0].plot(t, data[f"xhat{i + 1}"], lw=1.0, ls="--", label=f"xhat{i + 1}")
    axes[0].legend(frameon=False, ncol=2)
    axes[1].plot(t, data["theta"], lw=1.0, label="theta")
    axes[1].plot(t, data["theta_hat"], lw=1.0, ls="--", label="theta_hat")
    axes[1].legend(frameon=False)
    axes[2].plot(t, data["omega_hat"], lw=1.0, label="omega_hat")
    axes[2].plot(t, data["a1_hat"], lw=1.0, label="a1_hat")
    axes[2].plot(t, data["a2_hat"], lw=1.0, label="a2_hat")
    axes[2].legend(frameon=False)
    axes[2].set_xlabel("t, s")
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
