"""
Experiment configuration and its canonical text form.

The text form is one `key = value` per line, `#` starts a comment. `serialize`
always writes every field, in declaration order, with canonical values, so
`serialize(parse(text))` is stable and parses back to an equal config.
"""

import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np

import config
from exceptions import ConfigError, LabError
from sampling.model import ModelSpec

FORMATS = ("json", "csv")
SHRINKAGES = ("default", "const")


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got '{value}'")


def _parse_auto_float(value: str) -> Optional[float]:
    return None if value.lower() == "auto" else float(value)


def _parse_rank_tol(value: str) -> float:
    return 0.0 if value.lower() == "auto" else float(value)


def _float_list(text: str) -> str:
    return ",".join(repr(float(v)) for v in text.split(","))


def _parse_theta(value: str) -> str:
    if value in ("zeros", "ones"):
        return value
    return _float_list(value)


def _parse_sigma(value: str) -> str:
    if value == "identity":
        return value
    if value.startswith("diag:"):
        return "diag:" + _float_list(value[len("diag:"):])
    return value


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "subcommand": str,
    "n": int,
    "p": int,
    "theta": _parse_theta,
    "sigma": _parse_sigma,
    "reps": int,
    "master_seed": int,
    "rank_tol": _parse_rank_tol,
    "output_path": str,
    "format": str,
    "trials": int,
    "shrinkage": str,
    "c1": float,
    "h": _parse_auto_float,
    "contrast": _parse_bool,
    "workers": int,
    "timing": _parse_bool,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything needed to reproduce one run.

    Attributes:
        subcommand (str): Experiment name, e.g. "verify-bounds".
        n (int): Rows of Y.
        p (int): Dimension of X.
        theta (str): "zeros", "ones" or comma-separated values.
        sigma (str): "identity", "diag:v1,...,vp" or a path to a matrix file.
        reps (int): Monte Carlo replications.
        master_seed (int): 64-bit master seed.
        rank_tol (float): Rank tolerance; 0 means the default ("auto").
        output_path (str): Report destination, "-" for stdout.
        format (str): "json" or "csv".
        trials (int): Trials of the bound scan.
        shrinkage (str): "default" or "const".
        c1 (float): Bound C₁ of the shrinkage function.
        h (float | None): Finite-difference step, None for the per-entry default.
        contrast (bool): Run the finite-mean contrast instead of the infinite demo.
        workers (int): Threads used for replication blocks.
        timing (bool): Write wall-clock seconds into the report.
    """

    subcommand: str
    n: int = 3
    p: int = 5
    theta: str = "zeros"
    sigma: str = "identity"
    reps: int = 1000
    master_seed: int = config.DEFAULT_MASTER_SEED
    rank_tol: float = 0.0
    output_path: str = "-"
    format: str = "json"
    trials: int = 10_000
    shrinkage: str = "default"
    c1: float = 1.0
    h: Optional[float] = None
    contrast: bool = False
    workers: int = 1
    timing: bool = False

    def __post_init__(self) -> None:
        if not self.subcommand or not self.subcommand.replace("-", "").isalnum():
            raise ConfigError(f"'{self.subcommand}' is not a subcommand name", field="subcommand")
        for name in ("n", "p", "reps", "trials", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"must be a positive integer, got {getattr(self, name)}", field=name)
        if not -(1 << 63) <= self.master_seed < (1 << 64):
            raise ConfigError("must fit in 64 bits", field="master_seed")
        if self.rank_tol < 0:
            raise ConfigError("must be >= 0 or 'auto'", field="rank_tol")
        if self.format not in FORMATS:
            raise ConfigError(f"must be one of {FORMATS}", field="format")
        if self.shrinkage not in SHRINKAGES:
            raise ConfigError(f"must be one of {SHRINKAGES}", field="shrinkage")
        if not self.c1 > 0:
            raise ConfigError("must be > 0", field="c1")
        if self.h is not None and not self.h > 0:
            raise ConfigError("must be > 0 or 'auto'", field="h")

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        """
        Parse the `key = value` text form.

        Raises:
            ConfigError: With the line and field of the first problem found.
        """
        values: Dict[str, Any] = {}
        lines: Dict[str, int] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("expected 'key = value'", line=lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _PARSERS:
                raise ConfigError("unknown field", line=lineno, field=key)
            if key in values:
                raise ConfigError("duplicate field", line=lineno, field=key)
            try:
                values[key] = _PARSERS[key](value)
            except ValueError as e:
                raise ConfigError(str(e), line=lineno, field=key) from e
            lines[key] = lineno
        if "subcommand" not in values:
            raise ConfigError("missing required field", field="subcommand")
        try:
            return cls(**values)
        except ConfigError as e:
            raise ConfigError(e.detail, line=lines.get(e.field), field=e.field) from e

    def serialize(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "rank_tol":
                text = "auto" if value == 0 else repr(float(value))
            elif f.name == "h":
                text = "auto" if value is None else repr(float(value))
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_namespace(cls, args) -> "ExperimentConfig":
        """
        Build a config from argparse results.

        A `--config FILE` is read first; any flag that is not None overrides it.
        """
        base: Dict[str, Any] = {}
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                with open(config_path, encoding="utf-8") as f:
                    base = ExperimentConfig.parse(f.read()).to_dict()
            except OSError as e:
                raise ConfigError(f"cannot read config file: {e}") from e
        base["subcommand"] = args.subcommand
        for name in _PARSERS:
            value = getattr(args, name, None)
            if name == "subcommand" or value is None:
                continue
            if isinstance(value, str):
                try:
                    value = _PARSERS[name](value)
                except ValueError as e:
                    raise ConfigError(str(e), field=name) from e
            base[name] = value
        return cls(**base)

    def model_spec(self) -> ModelSpec:
        """
        Resolve theta and sigma into a ModelSpec.

        Raises:
            ConfigError: If theta/sigma do not match p or sigma is not SPD.
        """
        theta = resolve_theta(self.theta, self.p)
        sigma = resolve_sigma(self.sigma, self.p)
        try:
            return ModelSpec(n=self.n, p=self.p, theta=theta, sigma=sigma)
        except LabError as e:
            raise ConfigError(e.message, field="sigma") from e


def resolve_theta(text: str, p: int) -> np.ndarray:
    if text == "zeros":
        return np.zeros(p)
    if text == "ones":
        return np.ones(p)
    values = np.array([float(v) for v in text.split(",")])
    if values.shape != (p,):
        raise ConfigError(f"expected {p} values, got {values.size}", field="theta")
    return values


def resolve_sigma(text: str, p: int) -> np.ndarray:
    if text == "identity":
        return np.eye(p)
    if text.startswith("diag:"):
        values = [float(v) for v in text[len("diag:"):].split(",")]
        if len(values) != p:
            raise ConfigError(f"expected {p} diagonal values, got {len(values)}", field="sigma")
        return np.diag(values)
    if not os.path.exists(text):
        raise ConfigError(f"'{text}' is neither a shorthand nor an existing matrix file", field="sigma")
    sigma = read_matrix_file(text)
    if sigma.shape != (p, p):
        raise ConfigError(f"matrix file is {sigma.shape[0]} x {sigma.shape[1]}, expected {p} x {p}", field="sigma")
    return sigma


def read_matrix_file(path: str) -> np.ndarray:
    """
    Read a square matrix: first line "p", then p rows of p whitespace-separated decimals.

    Raises:
        ConfigError: With the line number of a malformed row.
    """
    with open(path, encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise ConfigError("matrix file is empty", field="sigma")
    try:
        size = int(lines[0])
    except ValueError as e:
        raise ConfigError(f"first line must be the dimension, got '{lines[0]}'", line=1, field="sigma") from e
    if len(lines) != size + 1:
        raise ConfigError(f"expected {size} rows, got {len(lines) - 1}", field="sigma")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = [float(v) for v in line.split()]
        except ValueError as e:
            raise ConfigError(str(e), line=lineno, field="sigma") from e
        if len(row) != size:
            raise ConfigError(f"expected {size} values, got {len(row)}", line=lineno, field="sigma")
        rows.append(row)
    return np.array(rows)
