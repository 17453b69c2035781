"""Best-effort figure rendering (Agg backend).

Plot emission is separated from CSV emission: numeric outputs never depend on
the rendering backend, and any figure failure degrades to a warning."""

import warnings

import numpy as np

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    _HAVE_MPL = True
except Exception:  # pragma: no cover - environment without a usable backend
    _HAVE_MPL = False


def _guard(fn):
    def wrapped(*args, **kwargs):
        if not _HAVE_MPL:
            return None
        try:
            return fn(*args, **kwargs)
        except Exception as err:  # pragma: no cover
            warnings.warn(f"figure rendering failed: {err}", stacklevel=2)
            return None

    return wrapped


@_guard
def plot_rabi_ensemble(trajs, path, title="ensemble Rabi oscillations"):
    """trajs: dict label -> SpinTrajectory."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, traj in trajs.items():
        ax.plot(traj.times * 1e9, traj.z, lw=1.0, label=str(label))
    ax.set_xlabel("t (ns)")
    ax.set_ylabel(r"$\langle\sigma_z\rangle$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


@_guard
def plot_spectra_overlay(cells, path, title="Rabi spectra"):
    """cells: list of dicts with keys freqs (rad/s), analytic, numeric
    (densities), label."""
    n = len(cells)
    ncols = min(4, n)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows),
                             squeeze=False)
    for k, cell in enumerate(cells):
        ax = axes[k // ncols][k % ncols]
        f_mhz = np.asarray(cell["freqs"]) / (2e6 * np.pi)
        ax.plot(f_mhz, cell["analytic"], "k-", lw=1.0, label="analytic")
        if cell.get("numeric") is not None:
            ax.plot(f_mhz, cell["numeric"], "r--", lw=1.0, label="numeric")
        ax.set_title(cell.get("label", ""), fontsize=8)
        ax.set_xlabel("f (MHz)", fontsize=8)
        ax.tick_params(labelsize=7)
    axes[0][0].legend(fontsize=7)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


@_guard
def plot_spectrum(spec, path, title="spectrum"):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(spec.freqs / (2e6 * np.pi), spec.density, lw=1.0)
    ax.set_xlabel("f (MHz)")
    ax.set_ylabel(f"density ({spec.units})")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


@_guard
def plot_lg_curve(curve, path, title="Leggett-Garg test", ideal=None):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    t_ns = curve.taus * 1e9
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    ax.fill_between(t_ns, curve.sys_lo, curve.sys_hi, color="green", alpha=0.25,
                    label="systematic")
    ax.errorbar(t_ns, curve.f, yerr=2.0 * curve.sigma_stat, fmt="r.", ms=4,
                lw=0.8, label=r"$f_{LG}$ ($\pm2\sigma$)")
    if ideal is not None:
        ax.plot(ideal[0] * 1e9, ideal[1], "b-", lw=1.0, label="ideal")
    ax.set_xlabel(r"$\tau$ (ns)")
    ax.set_ylabel(r"$f_{LG}(\tau)$")
    ax.set_xlim(0, min(t_ns.max(), 200.0))
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
