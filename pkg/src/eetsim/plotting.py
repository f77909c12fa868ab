"""Population plots for CLI runs (optional; the CSV is the primary output)."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIG_SIZE = (6.4, 4.0)
LINE_WIDTH = 1.2
DPI = 150


def plot_populations(times, populations, path, title=None, sites=None, features=None):
    """Save site populations against time as a PNG.

    Parameters
    ----------
    times : ndarray
        fs.
    populations : ndarray
        Shape (T, N).
    path : str or Path
        Output file.
    sites : sequence of int, optional
        1-based sites to draw; all by default.
    features : TrajectoryFeatures, optional
        When given, damping times are marked with dotted vertical lines.
    """
    sites = range(1, populations.shape[1] + 1) if sites is None else sites
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for b in sites:
        (line,) = ax.plot(times, populations[:, b - 1], lw=LINE_WIDTH, label=f"site {b}")
        if features is not None:
            td = features.damping_time[b - 1]
            if td:
                ax.axvline(td, color=line.get_color(), ls=":", lw=0.8)
    ax.set_xlabel("t (fs)")
    ax.set_ylabel("population")
    ax.set_xlim(times[0], times[-1])
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8, ncol=2, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path
