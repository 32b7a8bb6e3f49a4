"""Report emission: run manifests, JSON artifacts, and the Pareto scatter
(SVG plot plus CSV of the underlying points)."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, asdict

from . import __version__


@dataclass
class RunManifest:
    command: str
    inputs: list
    seed: int | None
    config_digest: str
    tool_version: str
    wall_clock_s: float

    def to_dict(self) -> dict:
        return asdict(self)


def config_digest(obj) -> str:
    """Stable hash of any JSON-serializable configuration payload."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def make_manifest(command: str, inputs, seed=None, config=None,
                  started: float | None = None) -> RunManifest:
    return RunManifest(
        command=command,
        inputs=[str(p) for p in inputs],
        seed=seed,
        config_digest=config_digest(config or {}),
        tool_version=__version__,
        wall_clock_s=round(time.perf_counter() - started, 3) if started else 0.0,
    )


def write_json(path, payload: dict, manifest: RunManifest | None = None) -> None:
    doc = dict(payload)
    if manifest is not None:
        doc["manifest"] = manifest.to_dict()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False, default=str)
        fh.write("\n")


def pareto_scatter(all_points, front, optimal, svg_path, csv_path,
                   title="Buffer memory vs p99 latency") -> None:
    """Scatter of every evaluated design in (BRAM blocks, p99 ns) with the
    non-dominated front and the selected optimum highlighted."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    def xy(pts):
        return ([p.bram_blocks for p in pts],
                [p.verified_latency_p99_ns for p in pts])

    front_pts = sorted(front, key=lambda p: p.bram_blocks)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    x, y = xy(all_points)
    ax.scatter(x, y, s=18, c="#9bb3c9", label="evaluated")
    fx, fy = xy(front_pts)
    ax.plot(fx, fy, "o-", ms=6, c="#1f5fa8", label="Pareto front")
    if optimal is not None:
        ax.scatter([optimal.bram_blocks], [optimal.verified_latency_p99_ns],
                   marker="*", s=220, c="#d4342c", zorder=5, label="optimal")
    ax.set_xlabel("BRAM blocks")
    ax.set_ylabel("p99 latency (ns)")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3, lw=0.5)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)

    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bram_blocks", "p99_ns", "drop_rate", "on_front",
                    "is_optimal", "config"])
        front_ids = {id(p) for p in front}
        for p in all_points:
            w.writerow([p.bram_blocks, p.verified_latency_p99_ns,
                        p.verified_drop_rate,
                        int(id(p) in front_ids),
                        int(optimal is not None and p is optimal),
                        p.config.key()])
