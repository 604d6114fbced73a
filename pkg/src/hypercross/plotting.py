"""Optional log-log figure of a convergence table (needs the ``plot`` extra)."""

from __future__ import annotations

from .errors import PreconditionError


def save_figure(table, path, fit=None) -> None:
    """Write a log2-log2 error plot of ``table`` (and ``fit``, if given) to ``path``."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise PreconditionError("--figure needs matplotlib; install the 'plot' extra") from None
    import numpy as np

    x = np.log2(table.scales)
    err = np.array([row.abs_error for row in table.rows], dtype=float)
    keep = err > 0
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(x[keep], np.log2(err[keep]), "o-", label=f"{table.method} on {table.fn}")
    if fit is not None:
        ax.plot(x[keep], np.log2(fit.predict(table.scales[keep])), "--", label=f"fit alpha={fit.alpha:.3f}")
    ax.set_xlabel("log2 n" if table.index_name == "n" else f"{table.index_name}")
    ax.set_ylabel("log2 error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)
