"""Batch figure/report generation from simulator output files."""

from __future__ import annotations

import argparse
import sys

from .artifacts import SchemaError
from .spectrum import plot_spectrum
from .survey import report_survey


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hardballs-report",
        description="Render figures and reports from hard-ball CLI outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_spec = sub.add_parser("spectrum", help="bar chart of a spectrum table")
    p_spec.add_argument("spectrum_file")
    p_spec.add_argument("out_image")
    p_surv = sub.add_parser("survey", help="markdown summary of a survey table")
    p_surv.add_argument("survey_file")
    p_surv.add_argument("out_markdown")
    args = parser.parse_args(argv)
    try:
        if args.command == "spectrum":
            plot_spectrum(args.spectrum_file, args.out_image)
        else:
            report_survey(args.survey_file, args.out_markdown)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
