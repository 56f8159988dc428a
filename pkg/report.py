"""Render stats and metrics reports: keyed JSONL records, aligned text tables,
per-document CSV and an optional xlsx workbook.

Module: from report import write_metrics_report, render_comparison
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import store
from metrics import MetricsReport
from stats import CorpusStats, PairStats

logger = logging.getLogger(__name__)

_DOC_FIELDS: list[str] = [
    "pair_id", "rouge1_f1", "rouge2_f1", "rougeL_f1",
    "rouge1_precision", "rouge1_recall", "num_prec", "n_numerals", "inconsistent_numerals",
]

# ---------------------------------------------------------------------------
# Formatting helpers
# ---------------------------------------------------------------------------


def _fmt(value: float | None, digits: int = 4) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    """Left-aligned first column, right-aligned numbers."""
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]

    def _line(cells: list[str]) -> str:
        out = [str(cells[0]).ljust(widths[0])]
        out += [str(c).rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join(out).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([_line(header), rule, *(_line(r) for r in rows)]) + "\n"


def _doc_row(doc) -> dict[str, object]:
    return {
        "pair_id": doc.pair_id,
        "rouge1_f1": _fmt(doc.rouge1.f1 if doc.rouge1 else None),
        "rouge2_f1": _fmt(doc.rouge2.f1 if doc.rouge2 else None),
        "rougeL_f1": _fmt(doc.rougeL.f1 if doc.rougeL else None),
        "rouge1_precision": _fmt(doc.rouge1.precision if doc.rouge1 else None),
        "rouge1_recall": _fmt(doc.rouge1.recall if doc.rouge1 else None),
        "num_prec": _fmt(doc.num_prec),
        "n_numerals": doc.n_numerals,
        "inconsistent_numerals": " ".join(doc.inconsistent_numerals),
    }


def _write_csv(filepath: str | Path, rows: list[dict], fieldnames: list[str]) -> None:
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    logger.info("report: wrote %s (%d rows)", filepath, len(rows))


# ---------------------------------------------------------------------------
# Stats
# ---------------------------------------------------------------------------


def render_stats_table(stats: CorpusStats) -> str:
    rows = [
        ["documents", str(stats.n_docs)],
        ["coverage", _fmt(stats.coverage)],
        ["density", _fmt(stats.density)],
        ["compression", _fmt(stats.compression, 2)],
        ["mean doc tokens", _fmt(stats.mean_doc_tokens, 2)],
        ["mean summary tokens", _fmt(stats.mean_summary_tokens, 2)],
        ["mean doc sentences", _fmt(stats.mean_doc_sentences, 2)],
        ["mean summary sentences", _fmt(stats.mean_summary_sentences, 2)],
        ["undefined fragments", str(stats.n_undefined_fragments)],
        ["undefined compression", str(stats.n_undefined_compression)],
        ["undefined quartiles", str(stats.n_undefined_quartiles)],
    ]
    text = _table(["statistic", "value"], rows)
    histogram = ["", "salient unigram share by document quarter"]
    for k, share in enumerate(stats.quartile_shares, start=1):
        histogram.append(f"Q{k} {share:6.3f} {'#' * round(share * 40)}")
    return text + "\n".join(histogram) + "\n"


def write_stats_workbook(path: str | Path, stats: CorpusStats, per_pair: list[PairStats]) -> None:
    import openpyxl

    wb = openpyxl.Workbook()
    ws = wb.active
    ws.title = "corpus"
    ws.append(["statistic", "value"])
    for key, value in stats.model_dump().items():
        if key == "quartile_shares":
            for k, share in enumerate(value, start=1):
                ws.append([f"quartile_{k}_share", share])
        else:
            ws.append([key, value])

    pairs_ws = wb.create_sheet("pairs")
    fields = list(PairStats.model_fields)
    pairs_ws.append(fields)
    for p in per_pair:
        row = p.model_dump()
        pairs_ws.append([
            " ".join(f"{s:.4f}" for s in row[f]) if f == "quartile_shares" and row[f] else row[f]
            for f in fields
        ])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    wb.save(path)
    logger.info("report: wrote %s", path)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def render_metrics_table(report: MetricsReport) -> str:
    m = report.means
    rows = [
        ["ROUGE-1", _fmt(m["rouge1_precision"]), _fmt(m["rouge1_recall"]), _fmt(m["rouge1_f1"])],
        ["ROUGE-2", _fmt(m["rouge2_precision"]), _fmt(m["rouge2_recall"]), _fmt(m["rouge2_f1"])],
        ["ROUGE-L", _fmt(m["rougeL_precision"]), _fmt(m["rougeL_recall"]), _fmt(m["rougeL_f1"])],
    ]
    rouge = report.config.get("rouge", {})
    lines = [
        f"system: {report.name}",
        f"documents evaluated: {report.n_evaluated}",
        f"missing predictions: {len(report.missing_predictions)}",
        f"undefined ROUGE: {report.n_undefined_rouge}",
        f"summaries without numerals: {report.n_no_numerals}",
        "rouge config: " + ", ".join(f"{k}={v}" for k, v in sorted(rouge.items())),
        "",
        _table(["metric", "precision", "recall", "f1"], rows),
        f"Num-Prec: {_fmt(m['num_prec'])}",
    ]
    return "\n".join(lines) + "\n"


def _report_records(report: MetricsReport) -> list[dict[str, object]]:
    records: list[dict[str, object]] = [{"section": "config", "key": "config", "value": report.config}]
    records += [{"section": "summary", "key": k, "value": v} for k, v in report.means.items()]
    records += [
        {"section": "summary", "key": "n_evaluated", "value": report.n_evaluated},
        {"section": "summary", "key": "missing_predictions", "value": report.missing_predictions},
        {"section": "summary", "key": "unknown_predictions", "value": report.unknown_predictions},
        {"section": "summary", "key": "n_undefined_rouge", "value": report.n_undefined_rouge},
        {"section": "summary", "key": "n_no_numerals", "value": report.n_no_numerals},
    ]
    records += [{"section": "document", "key": d.pair_id, "value": d.model_dump()} for d in report.documents]
    return records


def write_metrics_workbook(path: str | Path, report: MetricsReport) -> None:
    import openpyxl

    wb = openpyxl.Workbook()
    ws = wb.active
    ws.title = "summary"
    ws.append(["metric", "value"])
    for key, value in report.means.items():
        ws.append([key, value])
    ws.append(["n_evaluated", report.n_evaluated])
    ws.append(["missing_predictions", len(report.missing_predictions)])

    docs_ws = wb.create_sheet("documents")
    docs_ws.append(_DOC_FIELDS)
    for d in report.documents:
        row = _doc_row(d)
        docs_ws.append([row[f] for f in _DOC_FIELDS])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    wb.save(path)
    logger.info("report: wrote %s", path)


def write_metrics_report(
    workdir: str | Path,
    report: MetricsReport,
    config_hash: str,
    xlsx: bool = False,
) -> None:
    """report_<name>.jsonl, .txt and .csv; .xlsx on request."""
    workdir = Path(workdir)
    stem = f"report_{report.name}"
    store.write_records(workdir / f"{stem}.jsonl", "metrics_report", _report_records(report), config_hash)
    store.write_text(workdir / f"{stem}.txt", render_metrics_table(report))
    _write_csv(workdir / f"{stem}.csv", [_doc_row(d) for d in report.documents], _DOC_FIELDS)
    if xlsx:
        write_metrics_workbook(workdir / f"{stem}.xlsx", report)


# ---------------------------------------------------------------------------
# System comparison
# ---------------------------------------------------------------------------


def render_comparison(rows: list[dict[str, object]]) -> str:
    table_rows = [
        [str(r["system"]), _fmt(r["rouge1"]), _fmt(r["rouge2"]), _fmt(r["rougeL"]), _fmt(r["num_prec"]),
         str(r["n_evaluated"])]
        for r in rows
    ]
    return _table(["system", "ROUGE-1", "ROUGE-2", "ROUGE-L", "Num-Prec", "docs"], table_rows)


def write_comparison(workdir: str | Path, reports: list[MetricsReport]) -> str:
    from metrics import compare_reports

    text = render_comparison(compare_reports(reports))
    store.write_text(Path(workdir) / store.COMPARISON_FILE, text)
    return text
