import time
from contextlib import contextmanager
from typing import Dict, Iterator


class Timer:
    """Accumulates wall-clock durations of named pipeline stages."""

    def __init__(self) -> None:
        self.timings: Dict[str, float] = {}

    @contextmanager
    def time(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            # repeated stages (e.g. one per checkpoint) add up
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start

    @property
    def total(self) -> float:
        return sum(self.timings.values())

    def get_summary(self) -> Dict[str, float]:
        return {name: round(seconds, 4) for name, seconds in self.timings.items()}
