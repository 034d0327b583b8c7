"""Serialization of run outputs: event logs, summaries, spectra, surveys.

Event logs are line-delimited JSON: a header record with the run parameters,
one record per collision (fields k, t, i, j, a, pre, post), and a final
record with the closing state.  All floats use Python's shortest
round-trippable decimal representation, which json preserves.
"""

from __future__ import annotations

import json

import numpy as np

from .model import OrbitSegment, SystemParams

EVENTS_SCHEMA = "hardballs-events/1"
SPECTRUM_SCHEMA = "hardballs-spectrum/1"
SURVEY_SCHEMA = "hardballs-survey/1"


def _params_dict(params: SystemParams) -> dict:
    return {
        "n_balls": params.n_balls,
        "dim": params.dim,
        "torus_side": params.torus_side,
        "radius": params.radius,
        "masses": list(params.masses),
        "allow_zero_mass": params.allow_zero_mass,
    }


def params_from_dict(d: dict) -> SystemParams:
    return SystemParams(
        n_balls=int(d["n_balls"]),
        dim=int(d["dim"]),
        torus_side=float(d["torus_side"]),
        radius=float(d["radius"]),
        masses=tuple(float(x) for x in d["masses"]),
        allow_zero_mass=bool(d.get("allow_zero_mass", False)),
    )


def write_event_log(path, segment: OrbitSegment, meta: dict | None = None) -> None:
    with open(path, "w") as fh:
        header = {
            "type": "header",
            "schema": EVENTS_SCHEMA,
            "params": _params_dict(segment.params),
            "initial": {
                "positions": segment.initial.positions.tolist(),
                "velocities": segment.initial.velocities.tolist(),
                "time": segment.initial.time,
            },
        }
        if meta:
            header["meta"] = meta
        fh.write(json.dumps(header) + "\n")
        for ev in segment.events:
            fh.write(
                json.dumps(
                    {
                        "type": "event",
                        "k": ev.index,
                        "t": ev.time,
                        "i": ev.pair[0],
                        "j": ev.pair[1],
                        "a": [int(x) for x in ev.adjustment],
                        "pre": ev.pre_velocities.tolist(),
                        "post": ev.post_velocities.tolist(),
                    }
                )
                + "\n"
            )
        fh.write(
            json.dumps(
                {
                    "type": "final",
                    "positions": segment.final.positions.tolist(),
                    "velocities": segment.final.velocities.tolist(),
                    "time": segment.final.time,
                }
            )
            + "\n"
        )


def read_event_log(path) -> dict:
    """Parsed log: params, initial/final states, pairs, adjustments, times,
    and the velocity history array (n+1, N, nu)."""
    header = None
    events = []
    final = None
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["type"] == "header":
                header = rec
            elif rec["type"] == "event":
                events.append(rec)
            elif rec["type"] == "final":
                final = rec
    if header is None:
        raise ValueError(f"{path}: missing header record")
    if header.get("schema") != EVENTS_SCHEMA:
        raise ValueError(f"{path}: unknown schema {header.get('schema')!r}")
    params = params_from_dict(header["params"])
    events.sort(key=lambda r: r["k"])
    history = [np.array(header["initial"]["velocities"])]
    history += [np.array(r["post"]) for r in events]
    return {
        "params": params,
        "initial": header["initial"],
        "final": final,
        "meta": header.get("meta", {}),
        "pairs": [(r["i"], r["j"]) for r in events],
        "adjustments": [tuple(r["a"]) for r in events],
        "times": [r["t"] for r in events],
        "velocity_history": np.stack(history),
    }


def write_summary(path, record: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(record, indent=2, sort_keys=True) + "\n")


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_table(path, schema: str, meta: dict, columns: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema: {schema}\n")
        for key in sorted(meta):
            fh.write(f"# {key}: {meta[key]}\n")
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(str(x) for x in row) + "\n")


def write_spectrum(path, spectrum, meta: dict) -> None:
    rows = [
        (idx + 1, repr(float(lam)), repr(float(conv)))
        for idx, (lam, conv) in enumerate(zip(spectrum.exponents, spectrum.convergence))
    ]
    full_meta = {
        "total_time": spectrum.total_time,
        "frame_size": spectrum.frame_size,
        "n_balls": spectrum.n_balls,
        "dim": spectrum.dim,
        **meta,
    }
    _write_table(path, SPECTRUM_SCHEMA, full_meta, ["index", "lambda", "convergence_estimate"], rows)


SURVEY_COLUMNS = [
    "seed",
    "n_events",
    "p_sigma",
    "richness",
    "property_A",
    "dim_direct",
    "dim_cpf",
    "dim_alpha",
    "sufficient",
    "error",
]


def write_survey(path, rows: list[dict], meta: dict) -> None:
    table = [[row.get(col, "") for col in SURVEY_COLUMNS] for row in rows]
    _write_table(path, SURVEY_SCHEMA, meta, SURVEY_COLUMNS, table)


def read_table(path) -> tuple[dict, list[dict]]:
    """Generic reader for the '#'-headed delimited tables."""
    meta = {}
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
