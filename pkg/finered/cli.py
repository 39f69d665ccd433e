'''
console entry points: generate instances, run one reduction step,
verify pipelines against their source oracles, report the ledger
'''

from typing import Any, Callable, Dict, List, Optional, Tuple
import argparse
import json
import logging
import os
import sys
from collections import OrderedDict

from pydantic import BaseModel, ValidationError

from .errors import FineredError, MissingLedger, RetryBudgetExhausted
from .generate import generate
from .instances import Instance, ensure_valid, load_instance, serialize
from .ledger import LedgerRow, local_ledger
from .pipelines import PipelineParams, get_pipeline, record_reduction, run
from .runner import map_answers
from .utils import append_lines, get_config, write_atomic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

SIZE_KEYS = ('n', 'n_hat', 'ni', 'nj', 'nk', 'n1', 'n2', 'inner', 'd', 'f',
             'colors', 'count', 'p', 't', 'N', 'M', 'universe', 'family', 'queries')

def parse_params(pairs: List[str]) -> Dict[str, Any]:
    '''key=value pairs; values are read as json when they parse, else kept as text'''
    out: Dict[str, Any] = {}
    for pair in pairs:
        key, sep, text = pair.partition('=')
        if not sep or not key:
            raise argparse.ArgumentTypeError(f'expected key=value, got {pair!r}')
        try:
            out[key] = json.loads(text)
        except json.JSONDecodeError:
            out[key] = text
    return out

# gen

def cmd_gen(kind: str, params: Dict[str, Any], seed: int = 0, out: Optional[str] = None) -> Instance:
    inst = generate(kind, params, seed)
    text = serialize(inst)
    if out:
        write_atomic(out, text)
        logger.info('wrote %s instance to %s', kind, out)
    else:
        sys.stdout.write(text)
    return inst

# reduce

def _pipeline_params(args: argparse.Namespace) -> PipelineParams:
    return PipelineParams(seed=args.seed, d=args.d, g=args.g, eps=args.eps,
                          threshold=args.threshold, p=args.p, jobs=args.jobs)

def cmd_reduce(name: str, in_path: str, params: PipelineParams, out_dir: str,
               ledger_path: Optional[str] = None) -> List[str]:
    '''
    target instance files and decode.json in out_dir; the ledger rows of
    the step are appended to ledger_path
    '''
    p = get_pipeline(name)
    inst = ensure_valid(load_instance(in_path))
    with local_ledger(name) as ledger:
        red = p.reduce(inst, params)
        record_reduction(name, red)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    names = []
    for pos, target in enumerate(red.targets):
        fname = 'target-{:03d}.json'.format(pos)
        path = os.path.join(out_dir, fname)
        write_atomic(path, serialize(target))
        names.append(fname)
        written.append(path)
    doc = {'pipeline': name,
           'params': params.model_dump(),
           'source': {'kind': inst.kind, 'params': inst.params()},
           'targets': names,
           'decode': red.decode}
    path = os.path.join(out_dir, 'decode.json')
    write_atomic(path, json.dumps(doc, sort_keys=True, indent=1) + '\n')
    written.append(path)
    if ledger_path:
        append_lines(ledger_path, ledger.dump_lines())
    logger.info('%s: %d target instances in %s', name, len(red.targets), out_dir)
    return written

# verify

class TrialResult(BaseModel):
    seed: int
    ok: bool
    instance: Dict[str, Any] = {}
    comparisons: int = 0

class VerifyReport(BaseModel):
    pipeline: str
    trials: List[TrialResult] = []
    passed: bool = True
    counterexample: Optional[str] = None
    shrunk_params: Optional[Dict[str, Any]] = None

    @property
    def failures(self) -> int:
        return sum(1 for t in self.trials if not t.ok)

def _mismatch(name: str, inst: Instance, params: PipelineParams, audit: bool, fault: bool) -> bool:
    got, want = run(name, inst, params, audit=audit, fault=fault)
    return got != want

def shrink(kind: str, gen_params: Dict[str, Any], seed: int,
           fails: Callable[[Instance], bool]) -> Tuple[Dict[str, Any], Instance]:
    '''halve size parameters one at a time while the generated instance keeps failing'''
    current = dict(gen_params)
    inst = generate(kind, current, seed)
    improved = True
    while improved:
        improved = False
        for key in SIZE_KEYS:
            value = current.get(key)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 1:
                continue
            candidate = dict(current)
            candidate[key] = value // 2
            try:
                smaller = generate(kind, candidate, seed)
                failing = fails(smaller)
            except FineredError as e:
                logger.debug('shrinking %s=%d: %s', key, value // 2, e)
                continue
            if failing:
                current, inst, improved = candidate, smaller, True
    return current, inst

def cmd_verify(name: str, in_path: Optional[str] = None,
               params: Optional[PipelineParams] = None,
               gen_params: Optional[Dict[str, Any]] = None,
               trials: int = 20, audit: bool = False, fault: bool = False,
               ledger_path: Optional[str] = None) -> VerifyReport:
    '''
    Trial t runs with seed + t, on the given instance or on one generated
    from the pipeline's sample kind. The first failing generated instance
    is shrunk.
    '''
    params = params or PipelineParams()
    p = get_pipeline(name)
    report = VerifyReport(pipeline=name)
    if trials <= 0:
        logger.warning('%s: no trials ran, vacuous pass', name)
        return report
    fixed = ensure_valid(load_instance(in_path)) if in_path else None
    kind, sample = p.sample
    merged = dict(sample)
    merged.update(gen_params or {})

    def trial(t: int) -> Tuple[TrialResult, List[str]]:
        seed = params.seed + t
        inst = fixed if fixed is not None else generate(kind, merged, seed)
        trial_params = params.model_copy(update={'seed': seed})
        with local_ledger(name) as ledger:
            ok = not _mismatch(name, inst, trial_params, audit, fault)
        return TrialResult(seed=seed, ok=ok, instance=inst.params(),
                           comparisons=ledger.comparisons), ledger.dump_lines()

    results = map_answers(trial, list(range(trials)), params.jobs)
    lines = []
    for result, rows in results:
        report.trials.append(result)
        lines.extend(rows)
    if ledger_path:
        append_lines(ledger_path, lines)
    failed = [r for r in report.trials if not r.ok]
    if not failed:
        return report
    report.passed = False
    first = failed[0]
    trial_params = params.model_copy(update={'seed': first.seed})
    if fixed is not None:
        report.counterexample = serialize(fixed)
        return report

    def fails(inst: Instance) -> bool:
        return _mismatch(name, inst, trial_params, audit, fault)

    report.shrunk_params, smallest = shrink(kind, merged, first.seed, fails)
    report.counterexample = serialize(smallest)
    return report

# account

class AccountLine(BaseModel):
    pipeline: str
    construction: str
    key: str
    measured: float
    bound: float
    formula: str
    ratio: float

    @property
    def exceeded(self) -> bool:
        return self.ratio > 1

def read_ledger(path: str) -> List[LedgerRow]:
    if not os.path.exists(path):
        raise MissingLedger(f'no ledger at {path}')
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append(LedgerRow.model_validate_json(line))
            except ValidationError as e:
                raise MissingLedger(f'{path} line {lineno} is not a ledger row') from e
    if not rows:
        raise MissingLedger(f'ledger {path} is empty')
    return rows

def cmd_account(ledger_path: str) -> 'OrderedDict[str, List[AccountLine]]':
    '''per pipeline, every bounded measurement with its formula and ratio'''
    groups: 'OrderedDict[str, List[AccountLine]]' = OrderedDict()
    for row in read_ledger(ledger_path):
        ratios = row.ratios()
        for key, bound in row.bounds.items():
            if key not in ratios:
                continue
            line = AccountLine(pipeline=row.pipeline, construction=row.construction, key=key,
                               measured=row.measured[key], bound=bound,
                               formula=row.formulas.get(key, ''), ratio=ratios[key])
            groups.setdefault(row.pipeline, []).append(line)
    return groups

def format_account(groups: 'OrderedDict[str, List[AccountLine]]') -> str:
    out = []
    for pipeline, lines in groups.items():
        out.append('== {}'.format(pipeline or '(none)'))
        for x in lines:
            out.append('{:<24} {:<14} {:>10g} <= {:<40} = {:>10g}  ratio {:.3f}{}'.format(
                x.construction, x.key, x.measured, x.formula, x.bound, x.ratio,
                '  EXCEEDED' if x.exceeded else ''))
    return '\n'.join(out)

# command lines

def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')

def _guarded(fn: Callable[[], int]) -> int:
    try:
        return fn()
    except RetryBudgetExhausted as e:
        logger.error('Las Vegas budget exhausted: %s', e, exc_info=True)
        print(f'error: {e}', file=sys.stderr)
        return EXIT_BUDGET
    except FineredError as e:
        logger.error('%s: %s', type(e).__name__, e, exc_info=True)
        print(f'error: {type(e).__name__}: {e}', file=sys.stderr)
        return EXIT_USAGE

def _parser(prog: str, desc: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=prog, description=desc)
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    parser.add_argument('--seed', type=int, default=0, help='random seed')
    return parser

def _reduction_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--jobs', type=int, default=None, help='parallel oracle calls')
    parser.add_argument('--d', type=int, default=None, help='strip / bucket / block size')
    parser.add_argument('--g', type=int, default=None, help='bucket count (3sum-exacttri)')
    parser.add_argument('--eps', type=float, default=None, help='heavy cutoff exponent')
    parser.add_argument('--threshold', type=float, default=None, help='bit round threshold (minplus-cbmm)')
    parser.add_argument('--p', type=int, default=None, help='lightness bound (cbmm-acptrico)')
    parser.add_argument('--ledger', type=str, default=None, help='ledger path (default from .finered.json)')

def cl_gen(argv: Optional[List[str]] = None) -> None:
    parser = _parser('finered-gen', 'generate a seeded instance')
    parser.add_argument('kind', type=str, help='instance kind')
    parser.add_argument('params', type=str, nargs='*', help='generator parameters as key=value')
    parser.add_argument('-o', '--out', type=str, default=None, help='output file (default stdout)')
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    def _go() -> int:
        cmd_gen(args.kind, parse_params(args.params), args.seed, args.out)
        return EXIT_OK

    sys.exit(_guarded(_go))

def cl_reduce(argv: Optional[List[str]] = None) -> None:
    parser = _parser('finered-reduce', 'run one reduction step and write its target instances')
    parser.add_argument('pipeline', type=str, help='pipeline id')
    parser.add_argument('-i', '--in', dest='in_path', type=str, required=True, help='source instance file')
    parser.add_argument('-o', '--out', type=str, required=True, help='output directory')
    _reduction_flags(parser)
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    def _go() -> int:
        paths = cmd_reduce(args.pipeline, args.in_path, _pipeline_params(args), args.out,
                           args.ledger or get_config().ledger_path)
        for path in paths:
            print(path)
        return EXIT_OK

    sys.exit(_guarded(_go))

def cl_verify(argv: Optional[List[str]] = None) -> None:
    parser = _parser('finered-verify', 'check a pipeline against its source oracle')
    parser.add_argument('pipeline', type=str, help='pipeline id')
    parser.add_argument('params', type=str, nargs='*', help='generator parameters as key=value')
    parser.add_argument('-i', '--in', dest='in_path', type=str, default=None,
                        help='source instance file (default: generate one per trial)')
    parser.add_argument('--trials', type=int, default=20, help='number of trials')
    parser.add_argument('--audit', action='store_true', help='run on tattling reals')
    parser.add_argument('--fault', action='store_true', help='corrupt decoded answers (harness self-test)')
    _reduction_flags(parser)
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    def _go() -> int:
        report = cmd_verify(args.pipeline, args.in_path, _pipeline_params(args),
                            parse_params(args.params), args.trials, args.audit, args.fault,
                            args.ledger or get_config().ledger_path)
        for t in report.trials:
            print('trial seed={} {} {}'.format(t.seed, 'ok' if t.ok else 'MISMATCH', t.instance))
        print('{}: {}/{} trials passed'.format(report.pipeline, len(report.trials) - report.failures,
                                               len(report.trials)))
        if report.passed:
            return EXIT_OK
        if report.shrunk_params is not None:
            print('smallest failing parameters: {}'.format(report.shrunk_params))
        print(report.counterexample or '', end='')
        return EXIT_MISMATCH

    sys.exit(_guarded(_go))

def cl_account(argv: Optional[List[str]] = None) -> None:
    parser = argparse.ArgumentParser(prog='finered-account',
                                     description='measured sizes against their constructed bounds')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    parser.add_argument('ledger', type=str, nargs='?', default=None, help='ledger path')
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    def _go() -> int:
        print(format_account(cmd_account(args.ledger or get_config().ledger_path)))
        return EXIT_OK

    sys.exit(_guarded(_go))
