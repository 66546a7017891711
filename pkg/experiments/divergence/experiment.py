from base.experiment import Experiment
from experiments.divergence import bounds, divergence
from experiments.divergence.shrinkage import shrinkage_by_name


class VerifyDivergenceExperiment(Experiment):
    name = "verify-divergence"
    help = "Check the closed-form divergence against central differences on random draws."

    def run(self) -> divergence.DivergenceStudy:
        c = self.config
        return divergence.run_divergence_study(
            c.model_spec(),
            shrinkage_by_name(c.shrinkage, c.c1),
            c.reps,
            c.master_seed,
            h=c.h,
            rank_tol=c.rank_tol,
            workers=c.workers,
            progress=self.progress,
        )


class VerifyBoundsExperiment(Experiment):
    name = "verify-bounds"
    help = "Monte Carlo estimates of E[1/F] and E[lambda_max(S)] against their analytic bounds."

    def run(self) -> bounds.BoundLedger:
        c = self.config
        return bounds.verify_bound_chain(
            c.model_spec(), c.reps, c.master_seed, rank_tol=c.rank_tol, workers=c.workers, progress=self.progress
        )


class SandwichScanExperiment(Experiment):
    name = "sandwich-scan"
    help = "Measure how often each sandwich inequality holds on random draws."

    def run(self) -> bounds.SandwichScan:
        c = self.config
        return bounds.scan_sandwich(
            c.model_spec(), c.reps, c.master_seed, rank_tol=c.rank_tol, workers=c.workers, progress=self.progress
        )
