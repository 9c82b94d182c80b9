"""
Visualization Script: Generate figures from pipeline artifacts

Creates:
- SH vs mascon acceleration error map (from a compare-mascon CSV)
- Trajectory divergence over time (from a propagate .compare.csv)
- Orbit projections in the inertial and body frames (from trajectory CSVs)

Usage:
    python scripts/generate_plots.py map.csv [divergence.csv] [output_dir] [trajectory.csv ...]
"""

import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

MGAL_LIMIT = 1.0


def load_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def plot_error_map(map_csv, output_file="sh_mascon_error_map.png"):
    """Filled lon/lat map of |a_SH - a_mascon| in mgal."""
    data = load_csv(map_csv)
    lon = np.unique(data["lon_deg"])
    lat = np.unique(data["lat_deg"])
    # Rows are written latitude-major
    err = data["da_mgal"].reshape(len(lat), len(lon))

    plt.figure(figsize=(12, 6))
    mesh = plt.pcolormesh(lon, lat, err, shading="auto", cmap="viridis")
    cbar = plt.colorbar(mesh)
    cbar.set_label("|Δa| (mgal)", fontsize=12)
    inside = data["inside_brillouin"].reshape(len(lat), len(lon)) > 0
    if np.any(inside):
        plt.contour(lon, lat, inside.astype(float), levels=[0.5], colors="white", linewidths=1)

    plt.xlabel("Longitude (deg)", fontsize=12)
    plt.ylabel("Latitude (deg)", fontsize=12)
    status = "below" if err.max() < MGAL_LIMIT else "ABOVE"
    plt.title(f"SH vs Mascon Acceleration Error (max {err.max():.4f} mgal, {status} {MGAL_LIMIT:g} mgal)",
              fontsize=14, fontweight="bold")
    plt.tight_layout()
    plt.savefig(output_file, dpi=300)
    print(f"✅ Saved error map to {output_file}")
    plt.close()


def plot_divergence(divergence_csv, output_file="trajectory_divergence.png"):
    """Position and velocity divergence of two propagations against time."""
    data = load_csv(divergence_csv)
    hours = (data["t"] - data["t"][0]) / 3600.0

    fig, (ax_r, ax_v) = plt.subplots(2, 1, figsize=(10, 8), sharex=True)
    ax_r.plot(hours, data["dr_m"] / 1000.0, color="tab:red", linewidth=2)
    ax_r.set_ylabel("|Δr| (km)", fontsize=12)
    ax_r.grid(alpha=0.3)
    ax_r.set_title(f"Trajectory Divergence (final |Δr| = {data['dr_m'][-1] / 1000:.2f} km)",
                   fontsize=14, fontweight="bold")

    ax_v.plot(hours, data["dv_ms"], color="tab:blue", linewidth=2)
    ax_v.set_ylabel("|Δv| (m/s)", fontsize=12)
    ax_v.set_xlabel("Time (h)", fontsize=12)
    ax_v.grid(alpha=0.3)

    plt.tight_layout()
    plt.savefig(output_file, dpi=300)
    print(f"✅ Saved divergence plot to {output_file}")
    plt.close(fig)


FRAME_COLUMNS = {
    "inertial": ("rx", "ry", "rz"),
    "body": ("rbx", "rby", "rbz"),
}


def plot_trajectory(trajectory_csv, frame="inertial", output_file=None):
    """XY and XZ projections of a propagated orbit in the inertial or body frame."""
    if frame not in FRAME_COLUMNS:
        raise ValueError(f"frame must be one of {sorted(FRAME_COLUMNS)}, got {frame!r}")
    if output_file is None:
        output_file = f"trajectory_{frame}.png"
    data = load_csv(trajectory_csv)
    x, y, z = (data[c] / 1000.0 for c in FRAME_COLUMNS[frame])
    inside = data["inside_brillouin"] > 0

    fig, (ax_xy, ax_xz) = plt.subplots(1, 2, figsize=(14, 6))
    for ax, (u, w, labels) in zip((ax_xy, ax_xz), ((x, y, ("x", "y")), (x, z, ("x", "z")))):
        ax.plot(u, w, color="tab:blue", linewidth=1.5)
        ax.plot(u[0], w[0], "o", color="tab:green", label="start")
        if np.any(inside):
            ax.plot(u[inside], w[inside], ".", color="tab:red", markersize=3, label="inside Brillouin sphere")
        ax.plot(0.0, 0.0, "k+", markersize=10)
        ax.set_xlabel(f"{labels[0]} (km)", fontsize=12)
        ax.set_ylabel(f"{labels[1]} (km)", fontsize=12)
        ax.set_aspect("equal", adjustable="datalim")
        ax.grid(alpha=0.3)
    ax_xy.legend(loc="best")
    fig.suptitle(f"Trajectory, {frame} frame ({(data['t'][-1] - data['t'][0]) / 3600:.1f} h)",
                 fontsize=14, fontweight="bold")

    plt.tight_layout()
    plt.savefig(output_file, dpi=300)
    print(f"✅ Saved {frame}-frame trajectory to {output_file}")
    plt.close(fig)


def generate_all_plots(map_csv, divergence_csv=None, output_dir=".", trajectory_csvs=()):
    os.makedirs(output_dir, exist_ok=True)
    if os.path.isfile(map_csv):
        plot_error_map(map_csv, os.path.join(output_dir, "sh_mascon_error_map.png"))
    else:
        print(f"⚠️  {map_csv} not found, skipping error map")
    if divergence_csv:
        if os.path.isfile(divergence_csv):
            plot_divergence(divergence_csv, os.path.join(output_dir, "trajectory_divergence.png"))
        else:
            print(f"⚠️  {divergence_csv} not found, skipping divergence plot")
    for path in trajectory_csvs:
        if not os.path.isfile(path):
            print(f"⚠️  {path} not found, skipping trajectory plots")
            continue
        stem = os.path.splitext(os.path.basename(path))[0]
        for frame in FRAME_COLUMNS:
            plot_trajectory(path, frame, os.path.join(output_dir, f"{stem}_{frame}.png"))


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(2)
    generate_all_plots(
        sys.argv[1],
        sys.argv[2] if len(sys.argv) > 2 else None,
        sys.argv[3] if len(sys.argv) > 3 else ".",
        sys.argv[4:],
    )
