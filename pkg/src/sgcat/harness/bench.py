"""
Detection benchmark report.

Works on results CSV rows (see ``batch.RESULT_COLUMNS``) and on the bundled
reference cases, which keep their printed cells verbatim (``OT``, ``-``,
``FP``). Latency is ``t_detection - t_insertion`` with the earliest
insertion of the case; false positives and misses have no latency.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .batch import DET_COLUMNS, RESULT_COLUMNS

DETECTOR_LABELS = {"t_det_kf": "KF", "t_det_osv": "OSV", "t_det_np": "NP",
                   "t_det_svm": "SVM", "t_det_qsvm": "qSVM"}

DISCLAIMER = ("Simulated numbers come from a reduced-order plant model. The reference values were "
              "produced on a full-scope simulator and are not reproducible here; compare orderings and "
              "markers, not magnitudes.")

# reference row label -> results column
_REFERENCE_ROWS = {
    "Case #": "case_id",
    "LT spoofing [%]": "lt_spoof",
    "FT spoofing [lb/s]": "ft_spoof",
    "t_{insertion,LT} [s]": "t_insertion_lt",
    "t_{insertion,FT} [s]": "t_insertion_ft",
    "t_{trip} [s]": "t_trip",
    "t_{detection,KF} [s]": "t_det_kf",
    "t_{detection,OSV} [s]": "t_det_osv",
    "t_{detection,NP} [s]": "t_det_np",
    "t_{detection,SVM} [s]": "t_det_svm",
    "t_{detection,qSVM} [s]": "t_det_qsvm",
}


@dataclass
class CaseRecord:
    """One benchmark case; every cell is kept as its printed string."""

    cells: dict[str, str]

    def __getitem__(self, key: str) -> str:
        return self.cells.get(key, "")

    @property
    def case_id(self) -> str:
        return self["case_id"]

    def number(self, key: str) -> float | None:
        try:
            return float(self[key])
        except ValueError:
            return None

    @property
    def t_insertion(self) -> float | None:
        ts = [t for t in (self.number("t_insertion_lt"), self.number("t_insertion_ft")) if t is not None]
        return min(ts) if ts else None

    def latency(self, column: str):
        """Float latency, ``"FP"``, or None when the detector never alarmed."""
        cell = self[column]
        if cell == "FP":
            return "FP"
        t = self.number(column)
        if t is None or self.t_insertion is None:
            return None
        return t - self.t_insertion


def load_reference() -> list[CaseRecord]:
    text = resources.files("sgcat.data").joinpath("reference_cases.csv").read_text()
    rows = list(csv.reader(io.StringIO(text)))
    table = {_REFERENCE_ROWS[r[0]]: r[1:] for r in rows}
    n = len(table["case_id"])
    return [CaseRecord({k: v[i] for k, v in table.items()}) for i in range(n)]


def parse_results(text: str) -> list[CaseRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(RESULT_COLUMNS[:11]) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"results CSV is missing column(s) {sorted(missing)}")
    return [CaseRecord(dict(row)) for row in reader]


def read_results(path) -> list[CaseRecord]:
    return parse_results(Path(path).read_text())


def transposed_cases(records: list[CaseRecord]) -> list[str]:
    """Cases whose LT cell is not a plausible percent span (> 100), i.e. the
    LT and FT cells look swapped."""
    return [r.case_id for r in records if (r.number("lt_spoof") or 0.0) > 100.0]


@dataclass
class Summary:
    latencies: list[dict]  # per case: column -> latency / "FP" / None
    rankings: list[list[str]]
    fp_counts: dict[str, int]
    miss_counts: dict[str, int]
    mean_latency: dict[str, float | None]


def summarize(records: list[CaseRecord]) -> Summary:
    lat, ranks = [], []
    fp = {c: 0 for c in DET_COLUMNS}
    miss = {c: 0 for c in DET_COLUMNS}
    sums = {c: [] for c in DET_COLUMNS}
    for r in records:
        row = {c: r.latency(c) for c in DET_COLUMNS}
        for c, v in row.items():
            if v == "FP":
                fp[c] += 1
            elif v is None:
                if r[c] == "-":
                    miss[c] += 1
            else:
                sums[c].append(v)
        lat.append(row)
        timed = [(v, i, c) for i, (c, v) in enumerate(row.items()) if isinstance(v, float)]
        ranks.append([DETECTOR_LABELS[c] for _, _, c in sorted(timed)])
    mean = {c: (sum(v) / len(v) if v else None) for c, v in sums.items()}
    return Summary(lat, ranks, fp, miss, mean)


@dataclass
class BenchReport:
    records: list[CaseRecord]
    summary: Summary
    reference: list[CaseRecord] | None = None
    reference_summary: Summary | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def mean_latency(self) -> dict[str, float | None]:
        return {DETECTOR_LABELS[c]: v for c, v in self.summary.mean_latency.items()}

    def render(self) -> str:
        out = [DISCLAIMER, ""]
        out += _section("Results", self.records, self.summary)
        if self.reference is not None:
            out += [""] + _section("Reference cases (verbatim)", self.reference, self.reference_summary)
            out += [""] + _side_by_side(self.records, self.reference)
        if self.flags:
            out += [""] + [f"Note: {f}" for f in self.flags]
        return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if v == "FP":
        return "FP"
    return f"{v:.2f}"


def _grid(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    line = lambda cells: "  ".join(str(c).rjust(w) if i else str(c).ljust(w) for i, (c, w) in enumerate(zip(cells, widths)))
    return [line(header)] + [line(r) for r in rows]


def _section(title: str, records: list[CaseRecord], s: Summary) -> list[str]:
    labels = [("lt_spoof", "LT spoof [%]"), ("ft_spoof", "FT spoof [lb/s]"),
              ("t_insertion_lt", "t_insertion,LT [s]"), ("t_insertion_ft", "t_insertion,FT [s]"),
              ("t_trip", "t_trip [s]")]
    labels += [(c, f"t_detection,{DETECTOR_LABELS[c]} [s]") for c in DET_COLUMNS]
    header = ["Case"] + [r.case_id for r in records]
    rows = [[name] + [r[key] for r in records] for key, name in labels]
    rows += [[f"latency,{DETECTOR_LABELS[c]} [s]"] + [_fmt(l[c]) for l in s.latencies] for c in DET_COLUMNS]
    out = [title, "-" * len(title)] + _grid(header, rows) + [""]
    out.append("Detector order per case (fastest first):")
    for r, rank in zip(records, s.rankings):
        out.append(f"  case {r.case_id}: {' < '.join(rank) if rank else '(none)'}")
    out.append("False positives: " + ", ".join(f"{DETECTOR_LABELS[c]} {n}" for c, n in s.fp_counts.items()))
    out.append("Missed: " + ", ".join(f"{DETECTOR_LABELS[c]} {n}" for c, n in s.miss_counts.items()))
    out.append("Mean latency [s]: " + ", ".join(f"{DETECTOR_LABELS[c]} {_fmt(v)}" for c, v in s.mean_latency.items()))
    return out


def _side_by_side(records: list[CaseRecord], reference: list[CaseRecord]) -> list[str]:
    ref = {r.case_id: r for r in reference}
    header = ["Case", "t_trip"] + [DETECTOR_LABELS[c] for c in DET_COLUMNS]
    rows = []
    for r in records:
        q = ref.get(r.case_id)
        if q is None:
            continue
        rows.append([r.case_id, f"{r['t_trip']} | {q['t_trip']}"]
                    + [f"{r[c] or '.'} | {q[c]}" for c in DET_COLUMNS])
    title = "Side by side (result | reference)"
    return [title, "-" * len(title)] + _grid(header, rows)


def bench_report(records: list[CaseRecord], reference: list[CaseRecord] | None = None) -> BenchReport:
    if not records:
        raise ValueError("bench_report needs at least one case")
    flags = []
    for label, recs in (("input", records), ("reference", reference or [])):
        bad = transposed_cases(recs)
        if bad:
            flags.append(f"{label} cases {', '.join(bad)} have LT spoof cells above 100 %; "
                         "the LT and FT spoof cells appear transposed")
    for r in records:
        for c in DET_COLUMNS:
            v = r.latency(c)
            if isinstance(v, float) and (v < 0 or not math.isfinite(v)):
                flags.append(f"case {r.case_id}: negative {DETECTOR_LABELS[c]} latency without FP marker")
    return BenchReport(records, summarize(records), reference,
                       summarize(reference) if reference is not None else None, flags)
