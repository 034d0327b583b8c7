"""Markdown summary of a sufficiency survey table."""

from __future__ import annotations

from collections import defaultdict

from .artifacts import read_survey


def _truthy(s: str) -> bool:
    return s.strip().lower() in ("true", "1", "yes")


def report_survey(survey_file, out_markdown) -> None:
    """Richness-vs-sufficiency table with counts, written as markdown.

    A tainted survey (method disagreement recorded by the producer) gets a
    prominent warning banner.  A zero-row survey produces an empty table and
    succeeds.  Raises SchemaError on anything but a survey file.
    """
    meta, rows = read_survey(survey_file)
    clean = [r for r in rows if not r.get("error")]
    errored = [r for r in rows if r.get("error")]

    by_richness: dict[int, list[dict]] = defaultdict(list)
    for r in clean:
        by_richness[int(r["richness"])].append(r)

    lines = ["# Sufficiency survey", ""]
    if _truthy(meta.get("tainted", "")):
        lines += [
            "> **WARNING: tainted survey.** At least one segment produced",
            "> disagreeing neutral-space dimensions; treat every figure below",
            "> as unreliable until the disagreement is triaged.",
            "",
        ]
    for key in ("n_balls", "dim", "segment_length", "rich_min"):
        if key in meta:
            lines.append(f"- {key}: {meta[key]}")
    lines += [f"- segments: {len(rows)} ({len(errored)} with errors)", ""]

    lines += [
        "| richness | segments | sufficient | fraction |",
        "| --- | --- | --- | --- |",
    ]
    for rich in sorted(by_richness):
        group = by_richness[rich]
        n_suff = sum(1 for r in group if _truthy(r.get("sufficient", "")))
        frac = f"{n_suff}/{len(group)}"
        lines.append(f"| {rich} | {len(group)} | {n_suff} | {frac} |")
    lines.append("")

    rich_min = meta.get("rich_min")
    if rich_min is not None and clean:
        threshold = int(rich_min)
        rich = [r for r in clean if int(r["richness"]) >= threshold]
        n_suff = sum(1 for r in rich if _truthy(r.get("sufficient", "")))
        lines.append(f"richness >= {threshold}: {n_suff}/{len(rich)} sufficient")
        lines.append("")

    with open(out_markdown, "w") as fh:
        fh.write("\n".join(lines))
