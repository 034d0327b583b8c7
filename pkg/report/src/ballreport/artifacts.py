"""Parsers for the simulator CLI's output files.

This layer is read-only over the documented formats: '#'-headed delimited
tables (spectrum, survey) and JSON summaries.  Unknown schema versions are
rejected rather than guessed at, and no physics quantity is ever recomputed
here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

SPECTRUM_SCHEMA = "hardballs-spectrum/1"
SURVEY_SCHEMA = "hardballs-survey/1"


class SchemaError(ValueError):
    """The file does not carry the expected schema marker."""


def read_table(path) -> tuple[dict, list[dict]]:
    """'#'-commented key: value meta lines, then a tab-separated table."""
    meta: dict[str, str] = {}
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    meta[key.strip()] = val.strip()
                continue
            parts = line.split("\t")
            if columns is None:
                columns = parts
                continue
            rows.append(dict(zip(columns, parts)))
    return meta, rows


def _require_schema(meta: dict, expected: str, path) -> None:
    found = meta.get("schema")
    if found != expected:
        raise SchemaError(f"{path}: expected schema {expected!r}, found {found!r}")


def read_spectrum(path) -> tuple[dict, list[dict]]:
    """Meta plus rows with index, lambda, convergence_estimate as numbers."""
    meta, raw = read_table(path)
    _require_schema(meta, SPECTRUM_SCHEMA, path)
    rows = [
        {
            "index": int(r["index"]),
            "lambda": float(r["lambda"]),
            "convergence_estimate": float(r["convergence_estimate"]),
        }
        for r in raw
    ]
    return meta, rows


def read_survey(path) -> tuple[dict, list[dict]]:
    meta, rows = read_table(path)
    _require_schema(meta, SURVEY_SCHEMA, path)
    return meta, rows


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


@dataclass
class RunArtifacts:
    """Paths to one run's output files plus their parsed records."""

    summary_path: Path | None = None
    spectrum_path: Path | None = None
    survey_path: Path | None = None
    summary: dict = field(default_factory=dict)
    spectrum_meta: dict = field(default_factory=dict)
    spectrum_rows: list = field(default_factory=list)
    survey_meta: dict = field(default_factory=dict)
    survey_rows: list = field(default_factory=list)

    @classmethod
    def load(cls, out_dir) -> "RunArtifacts":
        out = Path(out_dir)
        art = cls()
        if (out / "summary.json").exists():
            art.summary_path = out / "summary.json"
            art.summary = read_summary(art.summary_path)
        if (out / "spectrum.tsv").exists():
            art.spectrum_path = out / "spectrum.tsv"
            art.spectrum_meta, art.spectrum_rows = read_spectrum(art.spectrum_path)
        if (out / "survey.tsv").exists():
            art.survey_path = out / "survey.tsv"
            art.survey_meta, art.survey_rows = read_survey(art.survey_path)
        return art
