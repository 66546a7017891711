import dataclasses
import math
from fractions import Fraction
from typing import Any

import numpy as np


class ReportHelper:
    """
    Helper class for turning experiment results into JSON/CSV-ready values.

    Static Methods:
        format(value) -> Any: Normalise a value recursively.
        cell(value) -> str: Normalise a single CSV cell.
    """

    @staticmethod
    def format(value: Any) -> Any:
        """
        Normalise a value for output.

        Fractions become "num/den" strings, non-finite floats become "inf",
        "-inf" or "nan", numpy scalars and arrays become Python values and
        lists, tuples become lists, and objects with `to_dict` or dataclasses
        become dicts. Dict key order is kept.
        """
        if isinstance(value, bool) or value is None or isinstance(value, str):
            return value
        if isinstance(value, Fraction):
            return f"{value.numerator}/{value.denominator}"
        if isinstance(value, np.bool_):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if math.isnan(value):
                return "nan"
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            return value
        if isinstance(value, np.ndarray):
            return [ReportHelper.format(v) for v in value.tolist()]
        if isinstance(value, dict):
            return {str(k): ReportHelper.format(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [ReportHelper.format(v) for v in value]
        if hasattr(value, "to_dict"):
            return ReportHelper.format(value.to_dict())
        if dataclasses.is_dataclass(value):
            return ReportHelper.format({f.name: getattr(value, f.name) for f in dataclasses.fields(value)})
        raise TypeError(f"Cannot put a {type(value).__name__} into a report.")

    @staticmethod
    def cell(value: Any) -> str:
        value = ReportHelper.format(value)
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        return "" if value is None else str(value)
