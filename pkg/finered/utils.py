from typing import Optional, Any, Iterable, List
import json
import os
import logging
import tempfile
from pydantic import BaseModel

logger = logging.getLogger(__name__)

class FineredConfig(BaseModel):
    # Las Vegas budgets: rounds per level <= c_iter * log2(n + 2), full restarts <= c_retry
    c_iter: int = 30
    c_retry: int = 5
    c_deg: int = 3
    quad_budget: int = 4
    eps: float = 0.5
    jobs: int = 1
    ledger_path: str = 'finered-ledger.jsonl'
    max_universe: int = 1 << 16

def find_finered_json() -> Optional[FineredConfig]:
    json_path = os.getenv('FINERED_JSON_PATH')
    if json_path:
        with open(json_path) as f:
            return FineredConfig(**json.load(f))

    # iterate through the current dir up to the root dir "/" to find a
    # .finered.json
    workdir = os.path.abspath(os.getcwd())
    while workdir:
        json_path = os.path.join(workdir, '.finered.json')
        if os.path.exists(json_path):
            with open(json_path) as f:
                cfgdata = json.load(f)
                return FineredConfig(**cfgdata)
        parentdir = os.path.abspath(os.path.join(workdir, '..'))
        if parentdir == workdir:
            break
        workdir = parentdir
    logger.warning('fail to find .finered.json, use default settings')
    return None

_config: Optional[FineredConfig] = None

def get_config() -> FineredConfig:
    global _config
    if _config is None:
        _config = find_finered_json() or FineredConfig()
    return _config

def set_config(cfg: Optional[FineredConfig]) -> None:
    global _config
    _config = cfg

def write_atomic(path: str, text: str) -> None:
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=dirname, prefix='.finered-')
    try:
        with os.fdopen(fd, 'w') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise

def append_lines(path: str, lines: Iterable[str]) -> None:
    with open(path, 'a') as f:
        for line in lines:
            print(line, file=f)

def freeze(value: Any) -> Any:
    '''
    turn json lists back into hashable tuples, recursively
    '''
    if isinstance(value, list):
        return tuple(freeze(v) for v in value)
    return value

def thaw(value: Any) -> Any:
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    return value

def ceil_div(a: int, b: int) -> int:
    return -(-a // b)

def ceil_log2(n: int) -> int:
    assert n >= 1
    return (n - 1).bit_length()

def chunked(items: List[Any], size: int) -> List[List[Any]]:
    assert size >= 1
    return [items[i:i + size] for i in range(0, len(items), size)]
