from abc import ABC, abstractmethod

from .experiment_config import ExperimentConfig
from .payload import Payload


class Experiment(ABC):
    """
    This is an abstract class for one CLI subcommand.
    You need to implement these:
    name: str, the subcommand
    help: str, one line shown by --help
    run() -> Payload
    """

    name = ""
    help = ""

    def __init__(self, config: ExperimentConfig, progress: bool = False) -> None:
        self.config = config
        self.progress = progress

    @abstractmethod
    def run(self) -> Payload:
        ...
