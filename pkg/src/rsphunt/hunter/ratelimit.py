"""Clocks and a sliding-window dispatch governor."""

from __future__ import annotations

import logging
import math
import threading
import time
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable, TypeVar

from ..errors import RateLimited

log = logging.getLogger(__name__)
T = TypeVar("T")


class RealClock:
    def monotonic(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)

    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class VirtualClock:
    """Deterministic clock: ``sleep`` advances time instantly."""

    def __init__(self, start: datetime | None = None):
        self.start = start or datetime(2024, 1, 1, tzinfo=timezone.utc)
        self.elapsed = 0.0
        self._lock = threading.Lock()

    def monotonic(self) -> float:
        return self.elapsed

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            with self._lock:
                self.elapsed += seconds

    def now(self) -> datetime:
        return self.start + timedelta(seconds=self.elapsed)


@dataclass(frozen=True)
class RateLimitPolicy:
    tokens_per_interval: int = 10
    interval: float = 60.0
    backoff_on_limit: float = 30.0
    max_retries: int = 3

    def __post_init__(self):
        if self.tokens_per_interval < 1:
            raise ValueError("tokens_per_interval must be positive")
        if self.interval <= 0 or self.backoff_on_limit < 0:
            raise ValueError("interval must be positive and backoff non-negative")


class RateGovernor:
    """Admits at most ``tokens_per_interval`` dispatches in any window of ``interval`` seconds."""

    def __init__(self, policy: RateLimitPolicy, clock=None):
        self.policy = policy
        self.clock = clock or RealClock()
        self._recent: deque[float] = deque()
        self.history: list[float] = []
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block (on the governor's clock) until a dispatch is allowed; returns its timestamp."""
        interval = self.policy.interval
        with self._lock:
            now = self.clock.monotonic()
            while self._recent and now - self._recent[0] >= interval:
                self._recent.popleft()
            if len(self._recent) >= self.policy.tokens_per_interval:
                head = self._recent.popleft()
                # earliest float at least one full interval after the oldest dispatch
                target = head + interval
                while target - head < interval:
                    target = math.nextafter(target, math.inf)
                self.clock.sleep(target - now)
                now = max(self.clock.monotonic(), target)
            self._recent.append(now)
            self.history.append(now)
            return now

    def call(self, fn: Callable[[], T]) -> T:
        """Dispatch ``fn`` under the governor, backing off and retrying on ``RateLimited``."""
        attempt = 0
        while True:
            self.acquire()
            try:
                return fn()
            except RateLimited as exc:
                attempt += 1
                if attempt > self.policy.max_retries:
                    raise
                wait = exc.retry_after if exc.retry_after is not None else self.policy.backoff_on_limit
                log.info("rate limited; backing off %.1fs (attempt %d)", wait, attempt)
                self.clock.sleep(wait)

    def max_in_window(self) -> int:
        """Largest number of recorded dispatches inside any half-open window of one interval."""
        best, lo = 0, 0
        for hi, t in enumerate(self.history):
            while t - self.history[lo] >= self.policy.interval:
                lo += 1
            best = max(best, hi - lo + 1)
        return best
