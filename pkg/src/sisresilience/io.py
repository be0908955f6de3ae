"""Run outputs: CSV time series, JSON summaries, manifests with checksums."""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import tempfile
from pathlib import Path

from . import __version__
from ._rng import stream_key
from .dynamics import run
from .errors import EmptyRecordError
from .metrics import report as make_report
from .scenario import parse_scenario, scenario_to_dict, serialize_scenario

CSV_COLUMNS = ("t", "n_infected", "omega", "cf", "new_infections", "mean_effective_tau")
MANIFEST_NAME = "manifest.json"


def _fmt(x):
    return repr(float(x))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_run(record, report, out_dir, stem="run", formats=("csv", "json")):
    """Write ``<stem>.csv`` and ``<stem>.json``; return the written paths."""
    if len(record) == 0:
        raise EmptyRecordError("refusing to write an empty record")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if "csv" in formats:
        p = out / f"{stem}.csv"
        n = record.node_count
        with open(p, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for t in range(len(record)):
                k = int(record.infected[t])
                w.writerow((t, k, _fmt(record.omega[t]), _fmt(1.0 - k / n),
                            int(record.new_infections[t]), _fmt(record.mean_effective_tau[t])))
        paths.append(p)
    if "json" in formats:
        p = out / f"{stem}.json"
        write_json(p, report.to_dict())
        paths.append(p)
    return paths


def read_csv_series(path):
    """Load a time-series CSV back into a column dict."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    ints = {"t", "n_infected", "new_infections"}
    return {c: [int(r[c]) if c in ints else float(r[c]) for r in rows] for c in CSV_COLUMNS}


def build_manifest(scenario, files, out_dir, *, extra=None):
    out = Path(out_dir)
    return {
        "tool": "sisresilience",
        "tool_version": __version__,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "master_seed": scenario.master_seed,
        "scenario": scenario_to_dict(scenario),
        "scenario_toml": serialize_scenario(scenario),
        "assumptions": list(scenario.assumptions),
        "replicates": [
            {"replicate": r, "stream_key": stream_key(scenario.master_seed, r)}
            for r in range(scenario.replicates)
        ],
        "checksums": {Path(f).relative_to(out).as_posix(): sha256_file(f) for f in sorted(files)},
        **(extra or {}),
    }


def verify_manifest(out_dir):
    """Return the files whose checksum no longer matches (empty list if all verify)."""
    out = Path(out_dir)
    manifests = list(out.glob(MANIFEST_NAME))
    if len(manifests) != 1:
        raise FileNotFoundError(f"expected exactly one {MANIFEST_NAME} in {out}")
    m = json.loads(manifests[0].read_text(encoding="utf-8"))
    bad = []
    for name, digest in m["checksums"].items():
        p = out / name
        if not p.exists() or sha256_file(p) != digest:
            bad.append(name)
    return bad


def run_scenario(scenario, out_dir=None, *, base_dir=None, backend=None, quiet=True, log=print, extra_files=()):
    """Run every replicate of ``scenario`` and write data, summaries and a manifest.

    Returns ``(records, reports, out_dir)``.
    """
    out = Path(out_dir or scenario.output_dir or f"out/{scenario.name}")
    out.mkdir(parents=True, exist_ok=True)
    cfg = scenario.run_config(base_dir=base_dir)
    records, reports, files = [], [], []
    for r in range(scenario.replicates):
        rec = run(cfg, r, backend)
        rep = make_report(rec)
        files += write_run(rec, rep, out, f"replicate_{r:03d}", scenario.formats)
        records.append(rec)
        reports.append(rep)
        if not quiet:
            log(f"replicate {r}: R={rep.resilience:.6f} peak={rep.peak_infected} "
                f"eradication={rep.eradication_time}")
    write_json(out / MANIFEST_NAME, build_manifest(scenario, files + list(extra_files), out))
    return records, reports, out


def replay_manifest(manifest_path, *, base_dir=None, backend=None):
    """Re-run the scenario echoed in a manifest and compare output checksums.

    Returns the data files whose bytes differ (empty when the replay is exact).
    """
    m = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    sc = parse_scenario(m["scenario_toml"])
    with tempfile.TemporaryDirectory() as tmp:
        run_scenario(sc, tmp, base_dir=base_dir, backend=backend)
        fresh = json.loads((Path(tmp) / MANIFEST_NAME).read_text(encoding="utf-8"))["checksums"]
    # auxiliary files (plot scripts, scenario copies) are not regenerated by a replay
    data = {k for k in m["checksums"] if k.startswith("replicate_")} | set(fresh)
    return sorted(k for k in data if m["checksums"].get(k) != fresh.get(k))


PLOT_TEMPLATE = '''"""Plot infected count (and alarm level) for {name}. Needs matplotlib."""
import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
fig, ax = plt.subplots(figsize=(7, 4))
ax2 = ax.twinx() if {show_omega} else None
for path in sorted(glob.glob(os.path.join(here, "replicate_*.csv")))[:{max_lines}]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = [int(r["t"]) for r in rows]
    ax.plot(t, [int(r["n_infected"]) for r in rows], color="black", lw=0.8, alpha=0.6)
    if ax2 is not None:
        ax2.plot(t, [float(r["omega"]) for r in rows], color="red", lw=0.8, alpha=0.6)
ax.set_xlabel("t")
ax.set_ylabel("infected cells")
ax.set_xscale("{xscale}")
if ax2 is not None:
    ax2.set_ylabel("alarm level", color="red")
ax.set_title("{name}")
fig.tight_layout()
fig.savefig(os.path.join(here, "{name}.png"), dpi=150)
'''


def write_plot_script(out_dir, name, show_omega=False, max_lines=5, xscale="linear"):
    p = Path(out_dir) / f"plot_{name}.py"
    p.write_text(PLOT_TEMPLATE.format(name=name, show_omega=show_omega, max_lines=max_lines, xscale=xscale),
                 encoding="utf-8")
    return p
