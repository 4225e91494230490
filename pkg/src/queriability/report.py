"""Rendering of evaluation reports as Markdown, CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .harness import PARTIAL, CellResult, EvaluationReport

FORMATS = ("md", "csv", "json")
CSV_HEADER = ("request", "approach", "query", "length", "constructors", "nesting",
              "status", "recall", "precision")

_FRACTION = {"type": "string", "pattern": r"^\d+(/\d+)?$"}
_FITNESS_PART = {"type": ["integer", "null"], "minimum": 0}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["mode", "order", "requests", "approaches", "cells", "footnotes"],
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": ["transcribed", "searched"]},
        "order": {"type": "string"},
        "requests": {"type": "array", "items": {"type": "string"}},
        "approaches": {"type": "array", "items": {"type": "string"}},
        "footnotes": {"type": "array", "items": {"type": "string"}},
        "cells": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["request", "approach", "query", "fitness", "status",
                             "recall", "precision", "answer"],
                "additionalProperties": False,
                "properties": {
                    "request": {"type": "string"},
                    "approach": {"type": "string"},
                    "query": {"type": ["string", "null"]},
                    "fitness": {
                        "type": "object",
                        "required": ["length", "constructors", "nesting"],
                        "properties": {
                            "length": _FITNESS_PART,
                            "constructors": _FITNESS_PART,
                            "nesting": _FITNESS_PART,
                        },
                    },
                    "status": {"enum": ["exact", "partial", "unanswered", "error"]},
                    "recall": _FRACTION,
                    "precision": _FRACTION,
                    "answer": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
                    "alternatives": {"type": "array", "items": {"type": "string"}},
                    "exhausted_budget": {"type": "boolean"},
                    "note": {"type": "string"},
                },
            },
        },
    },
}


def _frac(x: Fraction) -> str:
    return str(x)


def _fitness_fields(c: CellResult) -> tuple:
    if c.fitness is None:
        return (None, None, None)
    return c.fitness.astuple()


def _cell_json(c: CellResult) -> dict:
    length, constructors, nesting = _fitness_fields(c)
    return {
        "request": c.request,
        "approach": c.approach,
        "query": c.query,
        "fitness": {"length": length, "constructors": constructors, "nesting": nesting},
        "status": c.status,
        "recall": _frac(c.recall),
        "precision": _frac(c.precision),
        "answer": sorted(c.answer),
        "alternatives": list(c.alternatives),
        "exhausted_budget": c.exhausted_budget,
        "note": c.note,
    }


def report_to_json(rep: EvaluationReport) -> dict:
    return {
        "mode": rep.mode,
        "order": rep.order,
        "requests": list(rep.requests),
        "approaches": list(rep.approaches),
        "cells": [_cell_json(c) for c in rep.cells],
        "footnotes": list(rep.footnotes),
    }


def _render_json(rep: EvaluationReport) -> str:
    return json.dumps(report_to_json(rep), indent=2, sort_keys=True) + "\n"


def _render_csv(rep: EvaluationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in rep.cells:
        length, constructors, nesting = _fitness_fields(c)
        w.writerow([
            c.request, c.approach, c.query or "",
            "" if length is None else length,
            "" if constructors is None else constructors,
            "" if nesting is None else nesting,
            c.status, _frac(c.recall), _frac(c.precision),
        ])
    return buf.getvalue()


def _md_cell(c: CellResult) -> str:
    if c.query is None:
        return f"*{c.status}*"
    text = f"`{c.query}` {c.fitness}"
    if c.status == PARTIAL:
        text += " (partial)"
    elif c.status != "exact":
        text += f" ({c.status})"
    return text.replace("|", "\\|")


def _render_md(rep: EvaluationReport) -> str:
    lines = [
        f"# Evaluation ({rep.mode}, order {rep.order})",
        "",
        "| request | " + " | ".join(rep.approaches) + " |",
        "|---|" + "---|" * len(rep.approaches),
    ]
    by_key = {(c.request, c.approach): c for c in rep.cells}
    marks: list[str] = []
    for r in rep.requests:
        row = []
        for ma in rep.approaches:
            c = by_key.get((r, ma))
            row.append(_md_cell(c) if c else "")
        lines.append(f"| {r} | " + " | ".join(row) + " |")
    lines += ["", "| request | approach | recall | precision | answer |", "|---|---|---|---|---|"]
    for c in rep.cells:
        lines.append(
            f"| {c.request} | {c.approach} | {_frac(c.recall)} | {_frac(c.precision)} | "
            f"{', '.join(sorted(c.answer))} |"
        )
        if c.note:
            marks.append(f"{c.request}/{c.approach}: {c.note}")
    notes = list(rep.footnotes) + marks
    if notes:
        lines += ["", "Notes:", ""]
        lines += [f"{i}. {n}" for i, n in enumerate(notes, start=1)]
    return "\n".join(lines) + "\n"


def render_report(rep: EvaluationReport, format: str = "md") -> str:
    if format == "md":
        return _render_md(rep)
    if format == "csv":
        return _render_csv(rep)
    if format == "json":
        return _render_json(rep)
    raise ValueError(f"unknown report format {format!r} (expected one of {', '.join(FORMATS)})")
