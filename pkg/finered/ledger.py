'''
accounting ledger for reduction runs
'''

from typing import Dict, Optional, Any, List
import json
import logging
import threading
from functools import wraps
from contextvars import ContextVar
from pydantic import BaseModel

logger = logging.getLogger(__name__)

class LedgerRow(BaseModel):
    pipeline: str = ''
    construction: str
    measured: Dict[str, float]
    bounds: Dict[str, float] = {}
    formulas: Dict[str, str] = {}
    params: Dict[str, Any] = {}

    def ratios(self) -> Dict[str, float]:
        r = {}
        for key, bound in self.bounds.items():
            value = self.measured.get(key)
            if value is None:
                continue
            r[key] = value / bound if bound else (0.0 if value == 0 else float('inf'))
        return r

    def exceeded(self) -> List[str]:
        return [k for k, v in self.ratios().items() if v > 1]

class Ledger:
    '''
    Per-run accounting: comparison counter, statistics and construction rows
    '''
    pipeline: str
    comparisons: int
    stats: Dict[str, int]
    rows: List[LedgerRow]

    def __init__(self, pipeline: str = ''):
        self.pipeline = pipeline
        self._lock = threading.Lock()
        self.reset()

    def reset(self) -> None:
        self.comparisons = 0
        self.stats = {}
        self.rows = []

    def count(self, n: int = 1) -> None:
        with self._lock:
            self.comparisons += n

    def bump(self, name: str, n: int = 1) -> None:
        with self._lock:
            self.stats[name] = self.stats.get(name, 0) + n

    def peak(self, name: str, value: int) -> None:
        if value > self.stats.get(name, value - 1):
            self.stats[name] = value

    def record(self, construction: str,
               measured: Dict[str, float],
               bounds: Optional[Dict[str, float]] = None,
               formulas: Optional[Dict[str, str]] = None,
               **params: Any) -> LedgerRow:
        row = LedgerRow(pipeline=self.pipeline,
                        construction=construction,
                        measured=measured,
                        bounds=bounds or {},
                        formulas=formulas or {},
                        params=params)
        over = row.exceeded()
        if over:
            logger.warning('%s exceeds its constructed bound on %s', construction, over)
        else:
            logger.debug('%s measured %s', construction, measured)
        self.rows.append(row)
        return row

    def summary(self) -> LedgerRow:
        measured: Dict[str, float] = {'comparisons': self.comparisons}
        measured.update(self.stats)
        return LedgerRow(pipeline=self.pipeline,
                         construction='summary',
                         measured=measured)

    def dump_lines(self) -> List[str]:
        rows = self.rows + [self.summary()]
        return [json.dumps(r.model_dump(), sort_keys=True) for r in rows]

    def __str__(self) -> str:
        return '<Ledger {} comparisons={} rows={}>'.format(
            self.pipeline, self.comparisons, len(self.rows))

_default_ledger = Ledger('default')

cv: ContextVar[Optional[Ledger]] = ContextVar('finered_ledger', default=None)

def current_ledger() -> Ledger:
    ledger = cv.get()
    if ledger is None:
        return _default_ledger
    return ledger

def reset_comparisons() -> None:
    current_ledger().comparisons = 0

class LocalLedger:
    '''
    Context local ledger scope.
    Example usages:
    >>> with local_ledger('apsp-sparse') as ledger:
            min_plus_rect(A, B, oracle, seed=1)
    '''
    def __init__(self, pipeline: str = '', ledger: Optional[Ledger] = None):
        self.ledger = ledger if ledger is not None else Ledger(pipeline)
        self._tokens: List[Any] = []

    def __enter__(self) -> Ledger:
        self._tokens.append(cv.set(self.ledger))
        return self.ledger

    def __exit__(self, exc_type, exc, tb) -> None:
        cv.reset(self._tokens.pop())
        if exc_type is not None:
            logger.debug('ledger scope %s closed by %s', self.ledger.pipeline, exc_type.__name__)

local_ledger = LocalLedger

# a decorator
def accounted(pipeline: str = ''):
    def _wrapper(fn):
        @wraps(fn)
        def __w(*args, **kwargs):
            with local_ledger(pipeline or fn.__name__):
                return fn(*args, **kwargs)
        return __w
    return _wrapper
