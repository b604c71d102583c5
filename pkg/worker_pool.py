"""Batched thread-pool runner (asyncio.gather over fixed-size batches)"""

import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence

import config


async def gather_in_batches(fn: Callable, jobs: Sequence[tuple], threads: int,
                            batch_size: int = config.PARTITION_BATCH) -> List:
    """Run fn(*job) for every job on a thread pool; results keep job order."""
    loop = asyncio.get_running_loop()
    results = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for i in range(0, len(jobs), batch_size):
            batch = jobs[i:i + batch_size]
            futures = [loop.run_in_executor(pool, fn, *job) for job in batch]
            results.extend(await asyncio.gather(*futures))
    return results


def run_jobs(fn: Callable, jobs: Sequence[tuple], threads: int = 0) -> List:
    """Synchronous entry point; threads=0 uses config.THREADS."""
    if not jobs:
        return []
    return asyncio.run(gather_in_batches(fn, list(jobs), threads or config.THREADS))
