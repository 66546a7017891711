from base.experiment import Experiment
from experiments.heavytail import tail


class InfiniteDemoExperiment(Experiment):
    name = "infinite-demo"
    help = "Running means and tail index of 1/F for rank(S) = 1 (n = 1, p = 2); --contrast runs n = 3, p = 5."

    def run(self) -> tail.TailReport:
        c = self.config
        runner = tail.run_finite_contrast if c.contrast else tail.run_infinite_demo
        return runner(c.reps, c.master_seed, rank_tol=c.rank_tol, workers=c.workers, progress=self.progress)
