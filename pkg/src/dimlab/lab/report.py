"""Write check reports to disk: report.json, metadata, CSV tables and figures.

report.json and every CSV are byte-stable for a fixed config and seed;
anything that varies between runs (timings, versions, host) goes to
metadata.json instead.
"""
from __future__ import annotations

import csv
import json
import math
import platform
import sys
import time
from pathlib import Path

from .checks import ROW_HEADER, CheckReport, Verdict
from .config import SCHEMA_VERSION

EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def _clean(obj):
    """Make a structure JSON-safe: non-finite floats become strings, tuples lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _clean(obj.item())
    return obj


def overall(reports: list) -> Verdict:
    verdicts = {r.verdict for r in reports}
    if Verdict.VIOLATED in verdicts:
        return Verdict.VIOLATED
    if Verdict.INCONCLUSIVE in verdicts or not reports:
        return Verdict.INCONCLUSIVE
    return Verdict.CONSISTENT


def exit_code(reports: list) -> int:
    return {Verdict.CONSISTENT: EXIT_OK, Verdict.VIOLATED: EXIT_VIOLATED,
            Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[overall(reports)]


def report_document(reports: list, config: dict | None = None, name: str = "") -> dict:
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "verdict": overall(reports).value,
        "config": config,
        "checks": [r.to_json() for r in reports],
    })


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def _plot(path: Path, spec: dict, title: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in spec["series"].items():
        if not pts:
            continue
        xs, ys = zip(*pts)
        style = "o" if len(pts) == 1 else ".-"
        ax.plot(xs, ys, style, label=label, markersize=4)
    ref = spec.get("reference")
    if ref is not None and math.isfinite(ref):
        ax.axhline(ref, color="k", linestyle="--", linewidth=0.8, label="reference")
    ax.set_xlabel(spec["x"])
    ax.set_ylabel(spec["y"])
    ax.set_title(title, fontsize=9)
    if len(spec["series"]) <= 10:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def write_reports(reports: list, out_dir, config: dict | None = None, name: str = "",
                  figures: bool = True, started: float | None = None) -> Path:
    out = Path(out_dir)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    (out / "plotdata").mkdir(exist_ok=True)
    doc = report_document(reports, config, name)
    (out / "report.json").write_text(dumps(doc))
    rows = []
    for rep in reports:
        rows.extend([rep.theorem] + r.csv() for r in rep.rows)
        for tname, (header, trows) in rep.tables.items():
            _write_csv(out / "tables" / f"{rep.theorem}_{tname}.csv", header, trows)
        for pname, spec in rep.plots.items():
            prow = [[s, x, y] for s, pts in spec["series"].items() for x, y in pts]
            _write_csv(out / "plotdata" / f"{rep.theorem}_{pname}.csv", ["series", "x", "y"], prow)
    _write_csv(out / "tables" / "rows.csv", ["theorem"] + ROW_HEADER, rows)
    if figures:
        (out / "figures").mkdir(exist_ok=True)
        for rep in reports:
            for pname, spec in rep.plots.items():
                _plot(out / "figures" / f"{rep.theorem}_{pname}.png", spec, f"{rep.theorem}: {rep.title}")
    meta = {"python": sys.version.split()[0], "platform": platform.platform(),
            "finished_unix": time.time()}
    if started is not None:
        meta["elapsed_seconds"] = time.time() - started
    try:
        import numpy, scipy
        meta["numpy"], meta["scipy"] = numpy.__version__, scipy.__version__
    except ImportError:  # pragma: no cover
        pass
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out / "report.json"


def summary_lines(reports: list) -> list:
    lines = []
    for rep in reports:
        counts = {v: 0 for v in Verdict}
        for r in rep.rows:
            counts[r.verdict] += 1
        lines.append(f"{rep.theorem:13s} {rep.verdict.value:12s} rows={len(rep.rows)} "
                     f"consistent={counts[Verdict.CONSISTENT]} violated={counts[Verdict.VIOLATED]} "
                     f"inconclusive={counts[Verdict.INCONCLUSIVE]}")
        for r in rep.rows:
            if r.verdict is Verdict.VIOLATED:
                lines.append(f"  VIOLATED {r.row_id}: {r.left.value} {r.relation} {r.right.value} (tol {r.tol})")
    return lines
