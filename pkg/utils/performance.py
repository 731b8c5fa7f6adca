"""
Performance Monitor
Tempos por etapa de uma execução (construção, LPs, recursão, escrita)
"""

import functools
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from typing import Dict, List


class PerformanceMonitor:
    """Monitor de tempos por etapa, seguro entre threads"""

    def __init__(self):
        self.stage_metrics = defaultdict(
            lambda: {
                'calls': 0,
                'total_time': 0.0,
                'errors': 0,
                'min_time': float('inf'),
                'max_time': 0.0,
            }
        )
        self.order: List[str] = []

        # Lock para thread safety
        self.lock = threading.RLock()

    def log_stage(self, stage: str, duration: float, ok: bool = True):
        """Registra a duração de uma etapa"""
        with self.lock:
            if stage not in self.stage_metrics:
                self.order.append(stage)
            metrics = self.stage_metrics[stage]
            metrics['calls'] += 1
            metrics['total_time'] += duration
            metrics['min_time'] = min(metrics['min_time'], duration)
            metrics['max_time'] = max(metrics['max_time'], duration)
            if not ok:
                metrics['errors'] += 1

    @contextmanager
    def stage(self, name: str):
        """with monitor.stage('lp'): ..."""
        start = time.perf_counter()
        ok = True
        try:
            yield
        except Exception:
            ok = False
            raise
        finally:
            self.log_stage(name, time.perf_counter() - start, ok)

    def timings(self) -> Dict[str, float]:
        """Segundos acumulados por etapa, na ordem de execução"""
        with self.lock:
            return {
                stage: round(self.stage_metrics[stage]['total_time'], 6)
                for stage in self.order
            }

    def reset_stats(self):
        with self.lock:
            self.stage_metrics.clear()
            self.order.clear()


# ================================
# DECORATORS PARA MONITORAMENTO
# ================================


def monitor_performance(stage_name: str = None):
    """
    Decorator para métodos de objetos com atributo `monitor`
    Sem monitor a função roda sem registro.
    """

    def decorator(func):
        name = stage_name or func.__name__

        @functools.wraps(func)
        def wrapper(self, *args, **kwargs):
            monitor = getattr(self, 'monitor', None)
            if monitor is None:
                return func(self, *args, **kwargs)
            with monitor.stage(name):
                return func(self, *args, **kwargs)

        return wrapper

    return decorator
