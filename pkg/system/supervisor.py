import asyncio
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List

from utils.logger import log


class TaskSupervisor:
    """
    Runs blocking work items on a thread pool from an asyncio loop and
    returns results in submission order. A crashing item is logged with its
    traceback and re-raised, so the caller can discard partial output.
    """

    def __init__(self, threads: int = 1):
        self.threads = max(1, int(threads))

    @staticmethod
    async def create_task(coro, name="UnknownTask"):
        try:
            return await coro
        except asyncio.CancelledError:
            log.info(f"Task {name} cancelled.")
            raise
        except Exception as e:
            log.critical(f"Task {name} crashed: {e}")
            log.error(traceback.format_exc())
            raise

    async def map_ordered(self, fn: Callable[[Any], Any], items: Iterable[Any], name: str = "task") -> List[Any]:
        loop = asyncio.get_running_loop()
        items = list(items)
        with ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix=name) as pool:
            tasks = [
                self.create_task(loop.run_in_executor(pool, fn, item), name=f"{name}[{i}]")
                for i, item in enumerate(items)
            ]
            results = await asyncio.gather(*tasks)
        log.debug(f"{name}: {len(results)} item(s) on {self.threads} thread(s)")
        return list(results)

    def run(self, fn: Callable[[Any], Any], items: Iterable[Any], name: str = "task") -> List[Any]:
        """Blocking entry point for synchronous callers."""
        return asyncio.run(self.map_ordered(fn, items, name))
