# ============================================================
# NUMERICS METRICS COLLECTOR
# ============================================================

import threading
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, Optional

from utils.helpers import get_current_datetime_str
from utils.logger import log


@dataclass
class QuadraturePass:
    """One converged (or abandoned) quadrature run."""
    kind: str
    nodes: int
    passes: int
    converged: bool
    estimate: float
    timestamp: float = field(default_factory=time.time)


class MetricsCollector:
    """Thread-safe counters, gauges and recent quadrature passes.

    Worker threads record into the same collector, so every mutation goes
    through one lock. A run snapshots it into the metadata sidecar.
    """

    def __init__(self, history: int = 1000):
        self._counters: Dict[str, int] = defaultdict(int)
        self._gauges: Dict[str, float] = {}
        self._passes: Deque[QuadraturePass] = deque(maxlen=history)
        self._started = get_current_datetime_str()
        self._lock = threading.Lock()

    def increment_counter(self, name: str, value: int = 1):
        with self._lock:
            self._counters[name] += value

    def max_gauge(self, name: str, value: float):
        with self._lock:
            self._gauges[name] = max(self._gauges.get(name, value), value)

    def record_quadrature(self, kind: str, nodes: int, passes: int,
                          converged: bool, estimate: float):
        entry = QuadraturePass(kind, int(nodes), int(passes), bool(converged), float(estimate))
        with self._lock:
            self._passes.append(entry)
            self._counters[f"{kind}_integrals"] += 1
            self._counters[f"{kind}_passes"] += entry.passes
            if not converged:
                self._counters[f"{kind}_not_converged"] += 1
            key = f"{kind}_max_nodes"
            self._gauges[key] = max(self._gauges.get(key, 0), entry.nodes)
            key = f"{kind}_max_estimate"
            self._gauges[key] = max(self._gauges.get(key, 0.0), entry.estimate)
        if not converged:
            log.warning(f"{kind} quadrature stopped at {nodes} nodes (estimate {estimate:.2e})")

    def get_counter_value(self, name: str) -> int:
        with self._lock:
            return self._counters.get(name, 0)

    def get_gauge_value(self, name: str) -> Optional[float]:
        with self._lock:
            return self._gauges.get(name)

    def quadrature_stats(self) -> Dict[str, Any]:
        """Summary for the metadata sidecar ("quadrature stats")."""
        with self._lock:
            passes = list(self._passes)
            counters = dict(self._counters)
            gauges = dict(self._gauges)
        nodes = [p.nodes for p in passes]
        return {
            'since': self._started,
            'counters': counters,
            'gauges': gauges,
            'recent': len(passes),
            'mean_nodes': (sum(nodes) / len(nodes)) if nodes else 0,
        }

    def reset(self):
        with self._lock:
            self._counters.clear()
            self._gauges.clear()
            self._passes.clear()
            self._started = get_current_datetime_str()


metrics = MetricsCollector()
