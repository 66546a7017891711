"""
Run reports and their serialised forms.

JSON is a single object whose keys appear in this order: artifact, version,
subcommand, config, seed, wall_clock_seconds (only with --timing), passed,
findings, payload. Reals are written in shortest round-trip form, rationals as
"num/den" and non-finite reals as "inf"/"-inf"/"nan".

CSV is the payload's per-replication (or per-trial) table under its fixed header.
"""

import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import config
from base.payload import Payload
from exceptions import InvalidInputError, ReportWriteError
from report.report_helper import ReportHelper

logger = logging.getLogger(__name__)

STREAM_SCHEME = (
    f"block b = rep // {config.REPLICATION_BLOCK} draws from "
    "Generator(Philox(SeedSequence(master_seed mod 2**64, spawn_key=(b,)))) in replication order"
)


@dataclass
class RunReport:
    """
    Everything one run produced, plus the provenance to reproduce it.

    Attributes:
        subcommand (str): The experiment that ran.
        config (dict): Echo of the ExperimentConfig.
        master_seed (int): Seed of the run.
        payload (Payload): The experiment result.
        wall_clock_seconds (float | None): Only set when timing was asked for.
    """

    subcommand: str
    config: Dict[str, Any]
    master_seed: int
    payload: Payload
    wall_clock_seconds: Optional[float] = None
    version: str = field(default=f"{config.ARTIFACT_NAME}-{config.ARTIFACT_VERSION}")

    @property
    def findings(self) -> List[str]:
        return self.payload.findings()

    @property
    def passed(self) -> bool:
        return not self.findings

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "artifact": config.ARTIFACT_NAME,
            "version": self.version,
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": {"master_seed": self.master_seed, "streams": STREAM_SCHEME},
        }
        if self.wall_clock_seconds is not None:
            out["wall_clock_seconds"] = self.wall_clock_seconds
        out["passed"] = self.passed
        out["findings"] = self.findings
        out["payload"] = self.payload.to_dict()
        return out


def emit_report(report: RunReport, fmt: str = "json") -> bytes:
    """
    Serialise a report.

    Raises:
        InvalidInputError: If `fmt` is not "json" or "csv".
    """
    if fmt == "json":
        text = json.dumps(ReportHelper.format(report.to_dict()), indent=2, ensure_ascii=False, allow_nan=False)
        return (text + "\n").encode("utf-8")
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(report.payload.csv_header)
        for row in report.payload.csv_rows():
            writer.writerow([ReportHelper.cell(v) for v in row])
        return buffer.getvalue().encode("utf-8")
    raise InvalidInputError(f"Unknown report format '{fmt}', expected 'json' or 'csv'.")


def write_report(data: bytes, path: str) -> None:
    """
    Write serialised report bytes to `path`, or to stdout when `path` is "-".

    Raises:
        ReportWriteError: If the path cannot be written.
    """
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise ReportWriteError(f"Cannot write report to '{path}': {e}") from e
    logger.info("Report '%s' is saved.", path)
