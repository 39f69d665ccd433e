'''
Restricted reals: every exposed predicate is a sign test of a+b-a'-b'
or a+b-c over stored inputs, and every test is charged to a ledger.
'''

from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple, Union
import enum
import logging
from fractions import Fraction
from functools import cmp_to_key

from .errors import ComparisonModelViolation, EqualRanks, NotAMember, NotSeparable
from .ledger import Ledger, current_ledger
from .utils import ceil_log2

logger = logging.getLogger(__name__)

class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1

    @classmethod
    def of(cls, x: Any, y: Any) -> 'Ordering':
        if x < y:
            return cls.LESS
        elif x > y:
            return cls.GREATER
        return cls.EQUAL

RealLike = Union['RestrictedReal', int, Fraction, str]

class RestrictedReal:
    '''
    An exact rational or +inf. Input values are only read by the
    comparison primitives of this module.
    '''
    __slots__ = ('_value', '_infinite')

    _value: Fraction
    _infinite: bool

    def __init__(self, value: Union[int, Fraction] = 0, infinite: bool = False):
        self._value = Fraction(0) if infinite else Fraction(value)
        self._infinite = infinite

    @classmethod
    def parse(cls, value: RealLike) -> 'RestrictedReal':
        if isinstance(value, RestrictedReal):
            return value
        if isinstance(value, bool):
            raise ValueError('booleans are not reals')
        if isinstance(value, (int, Fraction)):
            return cls(value)
        if isinstance(value, str):
            text = value.strip()
            if text in ('inf', '+inf'):
                return cls(0, infinite=True)
            return cls(Fraction(text))
        raise ValueError(f'cannot read {type(value).__name__} as a real')

    @property
    def is_infinite(self) -> bool:
        return self._infinite

    @property
    def value(self) -> Fraction:
        if self._infinite:
            raise ValueError('+inf has no finite value')
        return self._value

    def neg(self) -> 'RestrictedReal':
        if self._infinite:
            raise ValueError('+inf cannot be negated')
        return type(self)(-self._value)

    def add(self, other: 'RestrictedReal') -> 'RestrictedReal':
        '''restricted addition of two stored values'''
        if self._infinite or other._infinite:
            return type(self)(0, infinite=True)
        return type(self)(self._value + other._value)

    def to_text(self) -> str:
        if self._infinite:
            return 'inf'
        if self._value.denominator == 1:
            return str(self._value.numerator)
        return '{}/{}'.format(self._value.numerator, self._value.denominator)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, RestrictedReal):
            return NotImplemented
        return (self._infinite, self._value) == (other._infinite, other._value)

    def __hash__(self) -> int:
        return hash((self._infinite, self._value))

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return 'RestrictedReal({})'.format(self.to_text())

INF = RestrictedReal(0, infinite=True)
ZERO = RestrictedReal(0)

def real(value: RealLike) -> RestrictedReal:
    return RestrictedReal.parse(value)

class TattlingReal(RestrictedReal):
    '''
    Audit variant: any read outside the comparison primitives raises.
    '''
    __slots__ = ()

    def _tattle(self, what: str) -> Any:
        raise ComparisonModelViolation(f'input real read through {what}')

    @property
    def value(self) -> Fraction:
        return self._tattle('value')

    def to_text(self) -> str:
        return self._tattle('to_text')

    def __eq__(self, other: Any) -> bool:
        return self._tattle('==')

    def __ne__(self, other: Any) -> bool:
        return self._tattle('!=')

    def __lt__(self, other: Any) -> bool:
        return self._tattle('<')

    def __le__(self, other: Any) -> bool:
        return self._tattle('<=')

    def __gt__(self, other: Any) -> bool:
        return self._tattle('>')

    def __ge__(self, other: Any) -> bool:
        return self._tattle('>=')

    def __hash__(self) -> int:
        return self._tattle('hash')

    def __float__(self) -> float:
        return self._tattle('float')

    def __int__(self) -> int:
        return self._tattle('int')

    def __index__(self) -> int:
        return self._tattle('index')

    def __str__(self) -> str:
        return self._tattle('str')

    def __format__(self, spec: str) -> str:
        return self._tattle('format')

    def __repr__(self) -> str:
        return '<TattlingReal>'

def tattling(x: RestrictedReal) -> TattlingReal:
    return TattlingReal(x._value, infinite=x._infinite)

def untattled(x: RestrictedReal) -> RestrictedReal:
    '''the plain value behind an audited real, once the run is over'''
    return RestrictedReal(x._value, infinite=x._infinite)

def _charge(ledger: Optional[Ledger]) -> None:
    (ledger if ledger is not None else current_ledger()).count()

def _true_order(inf_l: bool, val_l: Fraction, inf_r: bool, val_r: Fraction) -> Ordering:
    if inf_l and inf_r:
        return Ordering.EQUAL
    if inf_l:
        return Ordering.GREATER
    if inf_r:
        return Ordering.LESS
    return Ordering.of(val_l, val_r)

def compare4(a: RestrictedReal, b: RestrictedReal,
             a2: RestrictedReal, b2: RestrictedReal,
             ledger: Optional[Ledger] = None) -> Ordering:
    '''order of a+b against a2+b2; infinite sums compare equal'''
    _charge(ledger)
    return _true_order(a._infinite or b._infinite, a._value + b._value,
                       a2._infinite or b2._infinite, a2._value + b2._value)

def compare3(a: RestrictedReal, b: RestrictedReal, c: RestrictedReal,
             ledger: Optional[Ledger] = None) -> Ordering:
    '''order of a+b against c'''
    _charge(ledger)
    return _true_order(a._infinite or b._infinite, a._value + b._value,
                       c._infinite, c._value)

def _omega_key(a: RestrictedReal, b: RestrictedReal) -> Tuple[int, Fraction]:
    return (int(a._infinite) + int(b._infinite), a._value + b._value)

def refined_compare4(a: RestrictedReal, b: RestrictedReal,
                     a2: RestrictedReal, b2: RestrictedReal,
                     ledger: Optional[Ledger] = None) -> Ordering:
    '''
    Total refinement of compare4: a sum is keyed by (number of +inf terms,
    finite part). Strict orders of compare4 are preserved.
    '''
    _charge(ledger)
    return Ordering.of(_omega_key(a, b), _omega_key(a2, b2))

class PerturbedReal:
    '''
    base + eps_coeff * delta for an infinitesimal delta > 0
    '''
    __slots__ = ('base', 'eps_coeff')

    def __init__(self, base: RestrictedReal, eps_coeff: int = 0):
        self.base = base
        self.eps_coeff = eps_coeff

    def __repr__(self) -> str:
        return '<PerturbedReal eps={}>'.format(self.eps_coeff)

def compare_perturbed(a: PerturbedReal, b: PerturbedReal,
                      a2: PerturbedReal, b2: PerturbedReal,
                      ledger: Optional[Ledger] = None) -> Ordering:
    '''order of a+b against a2+b2, bases first, then the delta coefficients'''
    base = refined_compare4(a.base, b.base, a2.base, b2.base, ledger=ledger)
    if base != Ordering.EQUAL:
        return base
    return Ordering.of(a.eps_coeff + b.eps_coeff, a2.eps_coeff + b2.eps_coeff)

class Difference:
    '''
    plus - minus (+ eps * delta). Two differences compare through one
    4-linear test: p1 - m1 < p2 - m2  iff  p1 + m2 < p2 + m1.
    '''
    __slots__ = ('plus', 'minus', 'eps')

    def __init__(self, plus: RestrictedReal, minus: RestrictedReal, eps: int = 0):
        self.plus = plus
        self.minus = minus
        self.eps = eps

    def __repr__(self) -> str:
        return '<Difference eps={}>'.format(self.eps)

def compare_differences(x: Difference, y: Difference,
                        ledger: Optional[Ledger] = None) -> Ordering:
    base = refined_compare4(x.plus, y.minus, y.plus, x.minus, ledger=ledger)
    if base != Ordering.EQUAL:
        return base
    return Ordering.of(x.eps, y.eps)

class RankList:
    '''
    Sorted distinct differences; equal differences share a rank.
    '''
    sorted_values: List[Difference]
    size: int

    def __init__(self, items: Sequence[Tuple[Hashable, Difference]],
                 ledger: Optional[Ledger] = None):
        self.size = len(items)
        keys: List[Hashable] = []
        diffs: List[Difference] = []
        seen = set()
        for key, diff in items:
            if key in seen:
                continue
            seen.add(key)
            keys.append(key)
            diffs.append(diff)

        def cmp(x: int, y: int) -> int:
            return int(compare_differences(diffs[x], diffs[y], ledger=ledger))

        order = sorted(range(len(diffs)), key=cmp_to_key(cmp))
        self._ranks: Dict[Hashable, int] = {}
        self.sorted_values = []
        prev = None
        for pos in order:
            if prev is None or cmp(prev, pos) < 0:
                self.sorted_values.append(diffs[pos])
            self._ranks[keys[pos]] = len(self.sorted_values) - 1
            prev = pos

    @classmethod
    def from_values(cls, values: Sequence[RealLike],
                    ledger: Optional[Ledger] = None) -> 'RankList':
        return cls([(v, Difference(real(v), ZERO)) for v in values], ledger=ledger)

    def __len__(self) -> int:
        return len(self.sorted_values)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._ranks

    @property
    def universe_log(self) -> int:
        return ceil_log2(max(1, len(self.sorted_values)))

    @property
    def levels(self) -> int:
        return self.universe_log + 1

    def rank_of(self, key: Hashable) -> int:
        try:
            return self._ranks[key]
        except KeyError:
            raise NotAMember(f'{key!r} was never inserted') from None

class DyadicInterval:
    '''[2^s * t, 2^s * (t+1)) inside [0, 2^L)'''
    __slots__ = ('level', 'index', 'universe_log')

    def __init__(self, level: int, index: int, universe_log: int):
        if level < 0 or index < 0 or (index + 1) << level > 1 << universe_log:
            raise ValueError(f'no dyadic interval level={level} index={index} in [0, 2^{universe_log})')
        self.level = level
        self.index = index
        self.universe_log = universe_log

    @property
    def start(self) -> int:
        return self.index << self.level

    @property
    def stop(self) -> int:
        return (self.index + 1) << self.level

    def left_half(self) -> range:
        if self.level == 0:
            return range(0)
        return range(self.start, self.start + (1 << (self.level - 1)))

    def right_half(self) -> range:
        if self.level == 0:
            return range(0)
        return range(self.start + (1 << (self.level - 1)), self.stop)

    def key(self) -> Tuple[int, int]:
        return (self.level, self.index)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, DyadicInterval):
            return NotImplemented
        return (self.level, self.index, self.universe_log) == (other.level, other.index, other.universe_log)

    def __hash__(self) -> int:
        return hash((self.level, self.index, self.universe_log))

    def __repr__(self) -> str:
        return '[{},{})'.format(self.start, self.stop)

def separating_interval(a: int, b: int, L: int) -> DyadicInterval:
    assert 0 <= a < 1 << L and 0 <= b < 1 << L, f'ranks outside [0, 2^{L})'
    if a == b:
        raise EqualRanks(f'rank {a} cannot be separated from itself')
    if a > b:
        raise NotSeparable(f'{a} > {b}: no interval has {a} on its left')
    level = (a ^ b).bit_length()
    return DyadicInterval(level, a >> level, L)

def covering_halves(r: int, L: int, side: str) -> List[DyadicInterval]:
    assert side in ('left', 'right'), side
    assert 0 <= r < max(1, 1 << L)
    want = 0 if side == 'left' else 1
    return [DyadicInterval(s, r >> s, L)
            for s in range(1, L + 1)
            if (r >> (s - 1)) & 1 == want]

def half_keys(r: int, L: int, side: str) -> List[Tuple[int, int]]:
    '''covering_halves as (level, index) keys, for graph labels'''
    want = 0 if side == 'left' else 1
    return [(s, r >> s) for s in range(1, L + 1) if (r >> (s - 1)) & 1 == want]
