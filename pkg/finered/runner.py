'''
bounded parallel oracle calls
'''

from typing import Callable, List, Optional, Sequence, TypeVar
import asyncio
import contextvars
import logging

from .utils import get_config

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

async def gather_answers(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> List[R]:
    '''
    run fn over items on the default executor, at most `jobs` at a time;
    each call sees a copy of the caller's context, so the active ledger follows it
    '''
    loop = asyncio.get_running_loop()
    sem = asyncio.Semaphore(max(1, jobs))

    async def _one(item: T) -> R:
        async with sem:
            ctx = contextvars.copy_context()
            return await loop.run_in_executor(None, ctx.run, fn, item)

    return list(await asyncio.gather(*(_one(x) for x in items)))

def map_answers(fn: Callable[[T], R], items: Sequence[T], jobs: Optional[int] = None) -> List[R]:
    if jobs is None:
        jobs = get_config().jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(gather_answers(fn, items, jobs))
    logger.debug('inside a running loop, answering %d items sequentially', len(items))
    return [fn(x) for x in items]
