"""Post-hoc figures and reports from hard-ball simulator output files."""

from .artifacts import (
    SPECTRUM_SCHEMA,
    SURVEY_SCHEMA,
    RunArtifacts,
    SchemaError,
    read_spectrum,
    read_summary,
    read_survey,
    read_table,
)
from .spectrum import plot_spectrum
from .survey import report_survey

__version__ = "0.1.0"

__all__ = [
    "SPECTRUM_SCHEMA",
    "SURVEY_SCHEMA",
    "RunArtifacts",
    "SchemaError",
    "plot_spectrum",
    "read_spectrum",
    "read_summary",
    "read_survey",
    "read_table",
    "report_survey",
]
