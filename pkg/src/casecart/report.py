"""Output bundles: per-replication CSVs, summaries, comparison grids and
trip-time validation against reference statistics.

All numbers are written with fixed formatting and no timestamps, so equal
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .durations import SERVICES
from .experiment import metric_names, replication_metrics
from .kernel.results import BUCKET_LABELS, ReplicationResult
from .policy import PolicyKind, policy_label
from .stats import EMPTY, SummaryStats, mean_ci, paired_t, stdev_ci, welch_test

BUNDLE_FILES = ("surgeries.csv", "trips.csv", "replications.csv", "summary.csv", "summary.txt", "metadata.json")


def num(x: float) -> str:
    """Exact, round-trippable float text for raw data files."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def fixed(x: float, digits: int = 6) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.{digits}f}"


def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")


def aligned(rows: list[list[str]], header: list[str]) -> str:
    """Plain-text table with right-aligned columns (first column left)."""
    cols = [header, *rows]
    widths = [max(len(str(r[i])) for r in cols) for i in range(len(header))]
    lines = []
    for k, r in enumerate(cols):
        cells = [str(c).ljust(widths[i]) if i == 0 else str(c).rjust(widths[i]) for i, c in enumerate(r)]
        lines.append("  ".join(cells).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# -- summaries --------------------------------------------------------------
@dataclass(frozen=True)
class SummaryRow:
    metric: str
    n: int
    mean: float
    sd: float
    ci_lo: float
    ci_hi: float


def _row(metric: str, s: SummaryStats) -> SummaryRow:
    if s.n >= 2:
        ci = mean_ci(s)
        return SummaryRow(metric, s.n, s.mean, s.sd, ci.lo, ci.hi)
    if s.n == 1:
        return SummaryRow(metric, 1, s.mean, math.nan, math.nan, math.nan)
    return SummaryRow(metric, 0, 0.0, math.nan, math.nan, math.nan)


def pooled_trip_rows(results: list[ReplicationResult]) -> list[SummaryRow]:
    """Trip-time mean and sd over all counted trips of all replications,
    with CIs for both."""
    rows = []
    for cls in ("clean", "soiled"):
        s = SummaryStats.of(t.minutes for r in results for t in r.trips if t.counted and t.cls == cls)
        rows.append(_row(f"trip/{cls}/mean", s))
        if s.n >= 2:
            ci = stdev_ci(s)
            rows.append(SummaryRow(f"trip/{cls}/sd", s.n, s.sd, math.nan, ci.lo, ci.hi))
        else:
            rows.append(SummaryRow(f"trip/{cls}/sd", s.n, 0.0 if s.empty else s.sd, math.nan, math.nan, math.nan))
    return rows


def summarize(per_rep: list[dict[str, float]]) -> list[SummaryRow]:
    return [_row(m, SummaryStats.of(r[m] for r in per_rep)) for m in metric_names()]


def summary_rows(results: list[ReplicationResult]) -> list[SummaryRow]:
    return summarize([replication_metrics(r) for r in results]) + pooled_trip_rows(results)


SUMMARY_HEADER = ["metric", "n", "mean", "sd", "ci_lo", "ci_hi"]


def _summary_cells(rows: list[SummaryRow]) -> list[list[str]]:
    return [[r.metric, str(r.n), fixed(r.mean), fixed(r.sd), fixed(r.ci_lo), fixed(r.ci_hi)] for r in rows]


# -- bundle -----------------------------------------------------------------
def write_bundle(out: str | Path, results: list[ReplicationResult], metadata: dict) -> Path:
    """Write a simulate-style bundle for one configuration."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    surg_rows, trip_rows, rep_rows = [], [], []
    names = metric_names()
    for res in results:
        r = res.rep_index
        for s in res.surgeries:
            surg_rows.append([r, s.surgery_id, s.service, s.or_id, s.day, num(s.scheduled), num(s.released),
                              num(s.staged), num(s.actual_start), num(s.delay), num(s.duration_h), int(s.counted)])
        for t in res.trips:
            trip_rows.append([r, t.agv, t.cls, t.origin, t.dest, num(t.depart), num(t.arrive), num(t.minutes),
                              t.bucket, int(t.counted)])
        m = replication_metrics(res)
        rep_rows.append([r, *(num(m[k]) for k in names)])
    _write(out / "surgeries.csv", _csv(surg_rows, ["rep", "surgery_id", "service", "or_id", "day", "scheduled",
                                                   "released", "staged", "actual_start", "delay_min",
                                                   "duration_h", "counted"]))
    _write(out / "trips.csv", _csv(trip_rows, ["rep", "agv", "class", "origin", "dest", "depart", "arrive",
                                               "minutes", "bucket", "counted"]))
    _write(out / "replications.csv", _csv(rep_rows, ["rep", *names]))
    rows = summary_rows(results)
    _write(out / "summary.csv", _csv(_summary_cells(rows), SUMMARY_HEADER))
    head = "".join(f"{k}: {metadata[k]}\n" for k in ("policy", "agvs", "replications", "seed") if k in metadata)
    _write(out / "summary.txt", head + "\n" + aligned(_summary_cells(rows), SUMMARY_HEADER))
    _write(out / "metadata.json", json.dumps({**metadata, "version": __version__}, indent=2, sort_keys=True) + "\n")
    return out


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# -- comparison grid ----------------------------------------------------------
def _pooled(results, cls) -> SummaryStats:
    s = SummaryStats.of(t.minutes for r in results for t in r.trips if t.counted and t.cls == cls)
    return s


def grid_tables(cells: list[tuple[PolicyKind, int, list[ReplicationResult]]]) -> dict[str, str]:
    """CSV and text tables for a policy x fleet-size grid.

    ``p_*_vs_prev_agvs`` compares a cell with the next smaller fleet under the
    same policy; ``p_delay_vs_prev_policy`` compares with the preceding policy
    at the same fleet size.  Both are paired t-tests over replications.
    """
    header = ["policy", "model", "agvs", "reps", "mean_delay_min", "delay_ci_lo", "delay_ci_hi",
              "delayed_surgeries"]
    for cls in ("clean", "soiled"):
        header += [f"{cls}_mean", f"{cls}_mean_lo", f"{cls}_mean_hi", f"{cls}_sd", f"{cls}_sd_lo", f"{cls}_sd_hi"]
    header += ["util_agv", "p_delay_vs_prev_agvs", "p_clean_vs_prev_agvs", "p_delay_vs_prev_policy"]
    metrics = {(p, n): [replication_metrics(r) for r in res] for p, n, res in cells}
    rows, svc_rows, cnt_rows = [], [], []
    for p, n, res in cells:
        ms = metrics[(p, n)]
        d = _row("", SummaryStats.of(m["mean_delay_min"] for m in ms))
        row = [p.value, policy_label(p), n, len(res), fixed(d.mean), fixed(d.ci_lo), fixed(d.ci_hi),
               fixed(sum(m["delayed_surgeries"] for m in ms) / len(ms))]
        for cls in ("clean", "soiled"):
            s = _pooled(res, cls)
            if s.n >= 2:
                mc, sc = mean_ci(s), stdev_ci(s)
                row += [fixed(s.mean), fixed(mc.lo), fixed(mc.hi), fixed(s.sd), fixed(sc.lo), fixed(sc.hi)]
            else:
                row += [fixed(0.0 if s.empty else s.mean)] + ["nan"] * 5
        row.append(fixed(sum(m["util/agv"] for m in ms) / len(ms)))
        smaller = [k for (q, k) in metrics if q == p and k < n]
        row += _p_pair(ms, metrics.get((p, max(smaller))) if smaller else None, ("mean_delay_min", "clean_trip_mean"))
        prev = [q for q, k in metrics if k == n and _order(q) < _order(p)]
        row += _p_pair(ms, metrics.get((max(prev, key=_order), n)) if prev else None, ("mean_delay_min",))
        rows.append(row)
        svc_rows.append([p.value, policy_label(p), n,
                         *(fixed(sum(m[f"delay_h/{s}"] for m in ms) / len(ms)) for s in SERVICES)])
        cnt_rows.append([p.value, policy_label(p), n,
                         *(fixed(sum(m[f"delayed/{s}"] for m in ms) / len(ms)) for s in SERVICES)])
    svc_header = ["policy", "model", "agvs", *SERVICES]
    return {
        "grid.csv": _csv(rows, header),
        "grid.txt": aligned([[str(c) for c in r] for r in rows], header),
        "service_delay_h.csv": _csv(svc_rows, svc_header),
        "service_delay_h.txt": aligned([[str(c) for c in r] for r in svc_rows], svc_header),
        "delayed_counts.csv": _csv(cnt_rows, svc_header),
    }


def _order(p: PolicyKind) -> int:
    return policy_label(p)


def _p_pair(a: list[dict], b: list[dict] | None, keys) -> list[str]:
    out = []
    for k in keys:
        if b is None or len(a) < 2 or len(a) != len(b):
            out.append("nan")
        else:
            out.append(fixed(paired_t([m[k] for m in a], [m[k] for m in b])[1]))
    return out


# -- validation -------------------------------------------------------------
@dataclass(frozen=True)
class ValidationRow:
    cls: str
    bucket: str
    ref: SummaryStats
    sim: SummaryStats
    p_value: float
    verdict: str  # PASS | FAIL | UNTESTABLE


def load_reference(path: str | Path) -> list[tuple[str, str, SummaryStats]]:
    out = []
    for i, row in enumerate(read_csv(path)):
        try:
            cls, bucket = row["class"].strip(), row["bucket"].strip()
            s = SummaryStats(int(row["n"]), float(row["mean"]), float(row["sd"]))
        except (KeyError, ValueError) as e:
            raise ValueError(f"{path}, row {i + 2}: {e}") from None
        if bucket not in BUCKET_LABELS:
            raise ValueError(f"{path}, row {i + 2}: unknown bucket {bucket!r}")
        out.append((cls, bucket, s))
    return out


def bundle_trip_stats(bundle: str | Path) -> dict[tuple[str, str], SummaryStats]:
    groups: dict[tuple[str, str], list[float]] = {}
    for row in read_csv(Path(bundle) / "trips.csv"):
        if row["counted"] == "1":
            groups.setdefault((row["class"], row["bucket"]), []).append(float(row["minutes"]))
    return {k: SummaryStats.of(v) for k, v in groups.items()}


def validate(sim: dict[tuple[str, str], SummaryStats], reference: list[tuple[str, str, SummaryStats]],
             alpha: float = 0.05) -> list[ValidationRow]:
    """Welch test per (class, bucket); buckets without two observations on
    both sides are untestable rather than failed."""
    rows = []
    for cls, bucket, ref in reference:
        s = sim.get((cls, bucket), EMPTY)
        if s.n < 2 or ref.n < 2:
            rows.append(ValidationRow(cls, bucket, ref, s, math.nan, "UNTESTABLE"))
            continue
        p = welch_test(s, ref)
        rows.append(ValidationRow(cls, bucket, ref, s, p, "PASS" if p >= alpha else "FAIL"))
    return rows


VALIDATION_HEADER = ["class", "bucket", "ref_n", "ref_mean", "ref_sd", "sim_n", "sim_mean", "sim_sd", "p_value",
                     "verdict"]


def validation_cells(rows: list[ValidationRow]) -> list[list[str]]:
    return [[r.cls, r.bucket, str(r.ref.n), fixed(r.ref.mean, 4), fixed(r.ref.sd, 4), str(r.sim.n),
             fixed(r.sim.mean, 4), fixed(r.sim.sd, 4), fixed(r.p_value, 6), r.verdict] for r in rows]


def validation_report(rows: list[ValidationRow]) -> dict[str, str]:
    cells = validation_cells(rows)
    return {"validation.csv": _csv(cells, VALIDATION_HEADER),
            "validation.txt": aligned(cells, VALIDATION_HEADER)}


# -- optimizer ----------------------------------------------------------------
OPT_HEADER = ["iteration", *SERVICES, "mean_delay_min", "ci_lo", "ci_hi", "accepted"]


def optimizer_report(history) -> str:
    rows = [[h.iteration, *h.inventory, fixed(h.mean), fixed(h.ci.lo), fixed(h.ci.hi), int(h.accepted)]
            for h in history]
    return _csv(rows, OPT_HEADER)


def scenario_table_report(rows) -> dict[str, str]:
    header = ["scenario", "policy", "model", *SERVICES, "mean_delay_min", "ci_lo", "ci_hi"]
    cells = [[r.scenario, r.policy.value, policy_label(r.policy), *r.inventory, fixed(r.evaluation.mean),
              fixed(r.evaluation.ci.lo), fixed(r.evaluation.ci.hi)] for r in rows]
    return {"scenario_table.csv": _csv(cells, header),
            "scenario_table.txt": aligned([[str(c) for c in r] for r in cells], header)}


def write_files(out: str | Path, files: dict[str, str]) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        _write(out / name, text)
