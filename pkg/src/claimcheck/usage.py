"""Cost counters emitted with every run outcome."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field


@dataclass
class UsageCounters:
    llm_calls: int = 0
    input_tokens_est: int = 0
    output_tokens_est: int = 0
    searches: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def add_llm_call(self, input_tokens: int, output_tokens: int) -> None:
        with self._lock:
            self.llm_calls += 1
            self.input_tokens_est += input_tokens
            self.output_tokens_est += output_tokens

    def add_search(self) -> None:
        with self._lock:
            self.searches += 1

    def as_dict(self) -> dict:
        return {
            "llm_calls": self.llm_calls,
            "input_tokens_est": self.input_tokens_est,
            "output_tokens_est": self.output_tokens_est,
            "searches": self.searches,
        }
