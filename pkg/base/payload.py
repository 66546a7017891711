from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, List, Sequence, Tuple


class Payload(ABC):
    """
    This is an abstract class for the result of one experiment.
    You need to implement these:
    csv_header: Tuple[str, ...]
    to_dict() -> Dict[str, Any], keys in a fixed order
    csv_rows() -> one row per replication (or per trial)
    findings() -> verification failures, empty when everything holds
    """

    csv_header: Tuple[str, ...] = ()

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        ...

    @abstractmethod
    def csv_rows(self) -> Iterable[Sequence[Any]]:
        ...

    def findings(self) -> List[str]:
        return []

    @property
    def passed(self) -> bool:
        return not self.findings()
