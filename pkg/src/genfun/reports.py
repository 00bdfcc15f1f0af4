"""CSV/JSON serialization and figure rendering for the CLI report paths.

Floats are serialized with 17 significant digits so identical runs produce
byte-identical delimited output; figures are rendered to PNG files alongside
the CSVs and never feed back into the data path.
"""

import csv
import json
import os

SCHEMA_VERSION = 1

REPRODUCE_CSV_COLUMNS = (
    "experiment", "mollifier", "epsilon", "psi_id", "value", "error_estimate")
QFT_CSV_COLUMNS = (
    "problem", "epsilon", "N", "time", "probability", "unitarity_defect")
DYSON_CSV_COLUMNS = (
    "problem", "order", "partial_sum_probability", "exact_probability")


def fmt(value):
    """Serialize one cell: floats at 17 significant digits, ints verbatim."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, columns, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(cell) for cell in row])


def write_json(path, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _figure_dir(out_dir):
    path = os.path.join(out_dir, "figures")
    os.makedirs(path, exist_ok=True)
    return path


def _import_pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_reproduce_figures(out_dir, eq2_cells, eq1_rows, supnorm_rows,
                             delta_sq_cells):
    """Render the reproduction-suite figures next to reproduce.csv.

    eq2_cells: {kind: [(eps, value)]}; eq1_rows: {psi_id: [(eps, value)]};
    supnorm_rows: [(eps, sup)]; delta_sq_cells: {kind: [(eps, value)]}.
    """
    plt = _import_pyplot()
    figdir = _figure_dir(out_dir)

    fig, ax = plt.subplots(figsize=(5.5, 4))
    for kind, cells in eq2_cells.items():
        eps = [e for e, _ in cells]
        dev = [abs(v + 1.0 / 6.0) for _, v in cells]
        ax.loglog(eps, [max(d, 1e-18) for d in dev], "o-", label=kind)
    ax.axhline(1e-10, color="k", ls="--", lw=0.8, label="gate 1e-10")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("|integral + 1/6|")
    ax.set_title("Step-cube identity: deviation from -1/6")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(figdir, "eq2_deviation.png"), dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.5, 4))
    for psi_id, cells in eq1_rows.items():
        eps = [e for e, _ in cells]
        mags = [max(abs(v), 1e-18) for _, v in cells]
        ax.loglog(eps, mags, "o-", label=f"psi {psi_id}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("|pairing|")
    ax.set_title("Pairings of H^2 - H against the suite")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(figdir, "eq1_pairings.png"), dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.5, 4))
    eps = [e for e, _ in supnorm_rows]
    sups = [s for _, s in supnorm_rows]
    ax.semilogx(eps, sups, "o-")
    ax.axhline(0.25, color="k", ls="--", lw=0.8, label="1/4")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("sup |H^2 - H|")
    ax.set_ylim(0.0, 0.3)
    ax.set_title("Sup-norm does not decay while all pairings vanish")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(figdir, "supnorm.png"), dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.5, 4))
    for kind, cells in delta_sq_cells.items():
        eps = [e for e, _ in cells]
        vals = [v for _, v in cells]
        ax.loglog(eps, vals, "o-", label=kind)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("integral of delta_eps^2")
    ax.set_title("A divergent family: integral of the squared delta")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(figdir, "delta_squared.png"), dpi=150)
    plt.close(fig)


def render_qft_figures(out_dir, dyson_blocks, sweep_blocks, rabi_points):
    """Render qft figures: partial sums per order, sweeps, Rabi check.

    dyson_blocks: {name: (orders, partial_probs, exact_prob)};
    sweep_blocks: {name: [(eps, prob)]};
    rabi_points: [(g*t, probability)] or [].
    """
    plt = _import_pyplot()
    figdir = _figure_dir(out_dir)

    if dyson_blocks:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for name, (orders, probs, exact) in dyson_blocks.items():
            ax.semilogy(orders, [max(p, 1e-18) for p in probs], "o-",
                        label=f"{name} partial sums")
            ax.axhline(max(exact, 1e-18), ls="--", lw=0.8,
                       label=f"{name} exact")
        ax.axhline(1.0, color="k", lw=0.8)
        ax.set_xlabel("order")
        ax.set_ylabel("probability of the partial sum")
        ax.set_title("Perturbative partial sums vs exact evolution")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(os.path.join(figdir, "dyson_partial_sums.png"), dpi=150)
        plt.close(fig)

    if sweep_blocks:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for name, cells in sweep_blocks.items():
            eps = [e for e, _ in cells]
            probs = [p for _, p in cells]
            ax.semilogx(eps, probs, "o-", label=name)
        ax.set_xlabel("epsilon")
        ax.set_ylabel("transition probability")
        ax.set_ylim(-0.05, 1.05)
        ax.set_title("Probabilities stay in [0, 1] along the epsilon sweep")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(os.path.join(figdir, "epsilon_sweeps.png"), dpi=150)
        plt.close(fig)

    if rabi_points:
        import numpy as np

        fig, ax = plt.subplots(figsize=(5.5, 4))
        gts = [gt for gt, _ in rabi_points]
        probs = [p for _, p in rabi_points]
        ax.plot(gts, probs, "o", label="computed")
        dense = np.linspace(0.0, max(gts) * 1.05, 400)
        ax.plot(dense, np.sin(dense) ** 2, "-", lw=0.8, label="sin^2(gt)")
        ax.set_xlabel("g*t")
        ax.set_ylabel("probability")
        ax.set_title("Two-level transitions against the closed form")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(os.path.join(figdir, "rabi_check.png"), dpi=150)
        plt.close(fig)
