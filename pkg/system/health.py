import os
import platform
import time

import psutil

from utils.logger import log


class SystemHealth:
    _start_time = time.time()

    @classmethod
    def get_metrics(cls):
        """
        Returns a dict of current host/process metrics for metadata sidecars.
        """
        try:
            process = psutil.Process(os.getpid())
            rss_mb = process.memory_info().rss / (1024 * 1024)
            threads = process.num_threads()
        except psutil.Error as e:
            log.warning(f"Process metrics unavailable: {e}")
            rss_mb, threads = None, None

        return {
            "cpu": psutil.cpu_percent(interval=None),
            "ram": psutil.virtual_memory().percent,
            "cpu_count": psutil.cpu_count(logical=True),
            "process_rss_mb": round(rss_mb, 2) if rss_mb is not None else None,
            "process_threads": threads,
            "python": platform.python_version(),
            "uptime_seconds": int(time.time() - cls._start_time),
        }
