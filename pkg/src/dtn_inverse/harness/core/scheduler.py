# Copyright 2021 - 2024 Universität Tübingen, DKFZ, EMBL, and Universität zu Köln
# for the German Human Genome-Phenome Archive (GHGA)
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Concurrent execution of independent probe jobs."""

import asyncio
import logging
from collections.abc import Callable, Sequence
from typing import Any

__all__ = ["JobScheduler"]

log = logging.getLogger(__name__)


class JobScheduler:
    """Runs jobs in worker threads, at most `jobs` at a time.

    Results come back in the order of the inputs.
    """

    def __init__(self, *, jobs: int):
        if jobs < 1:
            raise ValueError("At least one job must be allowed")
        self._jobs = jobs

    async def _gather(
        self, job: Callable[[Any], Any], items: Sequence[Any]
    ) -> list[Any]:
        semaphore = asyncio.Semaphore(self._jobs)

        async def run_one(index: int, item: Any) -> Any:
            async with semaphore:
                log.debug("Starting job %d of %d", index + 1, len(items))
                return await asyncio.to_thread(job, item)

        return list(
            await asyncio.gather(
                *(run_one(index, item) for index, item in enumerate(items))
            )
        )

    def map(self, job: Callable[[Any], Any], items: Sequence[Any]) -> list[Any]:
        """Apply the job to every item."""
        if self._jobs == 1 or len(items) <= 1:
            return [job(item) for item in items]
        return asyncio.run(self._gather(job, items))
