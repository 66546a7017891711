from typing import Any, Dict, List

from base.experiment import Experiment
from base.payload import Payload
from experiments.counterexample import bound, constants


class CounterexampleResult(Payload):
    """
    The exact counter-example together with its intermediate matrices.

    A finding is any difference from the printed values: lhs, rhs, the failed
    bound or one of the intermediate products.
    """

    csv_header = constants.COUNTEREXAMPLE_HEADER

    def __init__(self, check: bound.BoundCheck, intermediates, printed) -> None:
        self.check = check
        self.intermediates = intermediates
        self.printed = printed

    def mismatched(self) -> List[str]:
        return [name for name, value in self.printed.items() if self.intermediates[name] != value]

    def findings(self) -> List[str]:
        found = []
        if self.check.lhs != constants.EXPECTED_LHS:
            found.append(f"lhs is {self.check.lhs}, expected {constants.EXPECTED_LHS}")
        if self.check.rhs != constants.EXPECTED_RHS:
            found.append(f"rhs is {self.check.rhs}, expected {constants.EXPECTED_RHS}")
        if self.check.holds:
            found.append("the bound holds on the counter-example")
        found.extend(f"intermediate {name} differs from the printed matrix" for name in self.mismatched())
        return found

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.check.to_dict(),
            "intermediates": {name: m.to_strings() for name, m in self.intermediates.items()},
            "intermediates_match": not self.mismatched(),
        }

    def csv_rows(self):
        yield self.check.lhs, self.check.rhs, self.check.holds


class CounterexampleExperiment(Experiment):
    name = "counterexample"
    help = "Reproduce the exact counter-example in rational arithmetic."

    def run(self) -> CounterexampleResult:
        return CounterexampleResult(
            bound.verify_counterexample(),
            bound.exact_intermediates(),
            bound.printed_intermediates(),
        )


class ScanBoundExperiment(Experiment):
    name = "scan-bound"
    help = "Scan random singular T, SPD A and X for violations of the claimed bound."

    def run(self) -> bound.ScanResult:
        return bound.scan_cw_bound(
            self.config.trials,
            self.config.p,
            self.config.master_seed,
            workers=self.config.workers,
            progress=self.progress,
        )
