"""Command-line front end: experiment orchestration and structured outputs.

Exit codes: 0 success, 2 configuration error, 3 internal-consistency failure
(method disagreement or a failing selftest suite), 4 numerical-degeneracy
abort.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import eventlog, neutral, selftest
from .combinatorics import SymbolicScheme, check_property_A, components, richness, threshold_C
from .config import RunConfig, build_config, parse_config_file
from .dynamics import conserved, simulate
from .errors import (
    AccumulationGuard,
    ConfigError,
    HardBallError,
    MethodDisagreement,
    SimultaneousCollision,
    SingularSegment,
    TangentialApproach,
    TangentialEvent,
)
from .lyapunov import default_tol_zero, lyapunov_spectrum, pairing_defect, relevant_nonzero
from .model import sample_initial_state

_DEGENERACY = (
    TangentialApproach,
    TangentialEvent,
    SimultaneousCollision,
    AccumulationGuard,
    SingularSegment,
)


def _out_path(cfg: RunConfig, name: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.system_params()
    state = sample_initial_state(params, cfg.seed)
    kwargs = {}
    if cfg.n_collisions > 0:
        kwargs["n_collisions"] = cfg.n_collisions
    elif cfg.total_time > 0:
        kwargs["total_time"] = cfg.total_time
    else:
        raise ConfigError("simulate needs n_collisions or total_time")
    segment = simulate(params, state, eps_tangent=cfg.eps_tangent, **kwargs)
    h0, p0 = conserved(state, params)
    h1, p1 = conserved(segment.final, params)
    residue = 0.0
    for ev in segment.events:
        residue = max(
            residue, abs(float(np.linalg.norm(ev.contact_vector)) - 2.0 * params.radius)
        )
    eventlog.write_event_log(_out_path(cfg, "events.jsonl"), segment, meta={"seed": cfg.seed})
    eventlog.write_summary(
        _out_path(cfg, "summary.json"),
        {
            "kind": "simulate",
            "seed": cfg.seed,
            "n_events": segment.n_events,
            "final_time": segment.final.time,
            "energy_initial": h0,
            "energy_final": h1,
            "energy_drift": abs(h1 - h0),
            "momentum_drift": float(np.max(np.abs(p1 - p0))),
            "max_contact_residue": residue,
        },
    )
    print(f"simulate: {segment.n_events} events, dH={abs(h1-h0):.3e}, residue={residue:.3e}")
    return 0


def _survey_one(cfg_dict: dict, seed: int) -> dict:
    cfg = RunConfig(**cfg_dict)
    row = {"seed": seed, "error": ""}
    try:
        params = cfg.system_params()
        if cfg.random_masses:
            rng = np.random.default_rng(seed)
            from .model import with_masses

            params = with_masses(params, rng.uniform(0.5, 2.0, params.n_balls))
        state = sample_initial_state(params, seed)
        segment = simulate(params, state, n_collisions=cfg.segment_length)
        scheme = SymbolicScheme.from_segment(segment)
        _, p_sigma = components(scheme.pairs, params.n_balls)
        nb = neutral.neutral_direct(segment)
        dim_alpha, dim_cpf, _ = neutral.advance_system(segment)
        dims = {nb.dim, dim_cpf}
        if cfg.with_jacobian:
            dims.add(neutral.neutral_jacobian(segment))
        if len(dims) != 1:
            raise MethodDisagreement(f"dimensions disagree: {sorted(dims)}")
        row.update(
            n_events=segment.n_events,
            p_sigma=p_sigma,
            richness=richness(scheme.pairs, params.n_balls),
            property_A=check_property_A(scheme) is None,
            dim_direct=nb.dim,
            dim_cpf=dim_cpf,
            dim_alpha=dim_alpha,
            sufficient=nb.dim == params.dim + 1,
        )
    except MethodDisagreement as exc:
        row["error"] = f"disagreement: {exc}"
    except HardBallError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sufficiency(cfg: RunConfig) -> int:
    params = cfg.system_params()
    seeds = [cfg.seed + k for k in range(cfg.ensemble_size)]
    cfg_dict = asdict(cfg)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_survey_one, [cfg_dict] * len(seeds), seeds))
    else:
        rows = [_survey_one(cfg_dict, s) for s in seeds]
    rows.sort(key=lambda r: r["seed"])

    rich_min = cfg.rich_min or math.ceil(threshold_C(params.n_balls))
    rich_rows = [r for r in rows if not r["error"] and r["richness"] >= rich_min]
    n_suff = sum(1 for r in rich_rows if r["sufficient"])
    tainted = any(r["error"].startswith("disagreement") for r in rows)
    meta = {
        "n_balls": params.n_balls,
        "dim": params.dim,
        "segment_length": cfg.segment_length,
        "rich_min": rich_min,
        "rich_total": len(rich_rows),
        "rich_sufficient": n_suff,
        "tainted": tainted,
    }
    eventlog.write_survey(_out_path(cfg, "survey.tsv"), rows, meta)
    eventlog.write_summary(
        _out_path(cfg, "summary.json"),
        {
            "kind": "sufficiency",
            **meta,
            "fraction_sufficient": (n_suff / len(rich_rows)) if rich_rows else None,
        },
    )
    print(
        f"sufficiency: {n_suff}/{len(rich_rows)} rich segments sufficient"
        + (" [TAINTED]" if tainted else "")
    )
    return 3 if tainted else 0


def cmd_lyapunov(cfg: RunConfig) -> int:
    params = cfg.system_params()
    if cfg.total_time <= 0:
        raise ConfigError("lyapunov needs total_time > 0")
    state = sample_initial_state(params, cfg.seed)
    m = cfg.frame_size or None
    spectrum = lyapunov_spectrum(
        params, state, total_time=cfg.total_time, renorm_every=cfg.renorm_every, m=m
    )
    tol = cfg.tol_zero or default_tol_zero(spectrum)
    verdict = (
        relevant_nonzero(spectrum, tol) if spectrum.is_full_frame else "unavailable"
    )
    eventlog.write_spectrum(
        _out_path(cfg, "spectrum.tsv"),
        spectrum,
        meta={"seed": cfg.seed, "tol_zero": tol, "verdict": verdict},
    )
    eventlog.write_summary(
        _out_path(cfg, "summary.json"),
        {
            "kind": "lyapunov",
            "seed": cfg.seed,
            "verdict": verdict,
            "tol_zero": tol,
            "lambda_max": float(spectrum.exponents[0]),
            "pairing_defect": pairing_defect(spectrum) if spectrum.is_full_frame else None,
            "near_zero_count": int(np.sum(np.abs(spectrum.exponents) < tol)),
        },
    )
    print(f"lyapunov: lambda_1={spectrum.exponents[0]:.4f}, verdict={verdict}")
    return 0


def cmd_richness(cfg: RunConfig) -> int:
    if not cfg.events:
        raise ConfigError("richness needs events=PATH (an event log)")
    try:
        log = eventlog.read_event_log(cfg.events)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    params = log["params"]
    times = [log["initial"]["time"]] + log["times"]
    scheme = SymbolicScheme(
        n_balls=params.n_balls,
        pairs=log["pairs"],
        adjustments=log["adjustments"],
        slots=[times[k + 1] - times[k] for k in range(len(log["pairs"]))],
    )
    _, p_sigma = components(scheme.pairs, params.n_balls)
    record = {
        "kind": "richness",
        "n": len(scheme.pairs),
        "p_sigma": p_sigma,
        "richness": richness(scheme.pairs, params.n_balls),
        "property_A": check_property_A(scheme) is None,
    }
    eventlog.write_summary(_out_path(cfg, "summary.json"), record)
    print(
        f"richness: n={record['n']} P_Sigma={record['p_sigma']} "
        f"richness={record['richness']} property_A={record['property_A']}"
    )
    return 0


def cmd_selftest(cfg: RunConfig) -> int:
    results = selftest.run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    eventlog.write_summary(
        _out_path(cfg, "summary.json"),
        {
            "kind": "selftest",
            "suites": {name: {"passed": ok, "detail": detail} for name, ok, detail in results},
            "all_passed": all(ok for _, ok, _ in results),
        },
    )
    return 0 if all(ok for _, ok, _ in results) else 3


_COMMANDS = {
    "simulate": cmd_simulate,
    "sufficiency": cmd_sufficiency,
    "lyapunov": cmd_lyapunov,
    "richness": cmd_richness,
    "selftest": cmd_selftest,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hardballs",
        description="Event-driven hard-ball dynamics on the flat torus with "
        "hyperbolicity analysis.",
    )
    p.add_argument("kind", choices=sorted(_COMMANDS), help="experiment to run")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--n-balls", type=int, default=None, dest="n_balls")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--torus-side", type=float, default=None, dest="torus_side")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--masses", default=None, help="comma or space separated")
    p.add_argument("--n-collisions", type=int, default=None, dest="n_collisions")
    p.add_argument("--total-time", type=float, default=None, dest="total_time")
    p.add_argument("--segment-length", type=int, default=None, dest="segment_length")
    p.add_argument("--ensemble-size", type=int, default=None, dest="ensemble_size")
    p.add_argument("--renorm-every", type=int, default=None, dest="renorm_every")
    p.add_argument("--frame-size", type=int, default=None, dest="frame_size")
    p.add_argument("--tol-zero", type=float, default=None, dest="tol_zero")
    p.add_argument("--rich-min", type=int, default=None, dest="rich_min")
    p.add_argument("--random-masses", action="store_const", const=True, default=None,
                   dest="random_masses")
    p.add_argument("--with-jacobian", action="store_const", const=True, default=None,
                   dest="with_jacobian")
    p.add_argument("--events", default=None, help="input event log (richness)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {
            k: v
            for k, v in vars(args).items()
            if k not in ("config",) and v is not None
        }
        if "masses" in overrides:
            overrides["masses"] = tuple(
                float(x) for x in str(overrides["masses"]).replace(",", " ").split()
            )
        cfg = build_config(file_values, overrides)
        return _COMMANDS[cfg.kind](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MethodDisagreement as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 3
    except _DEGENERACY as exc:
        print(f"numerical degeneracy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except HardBallError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
