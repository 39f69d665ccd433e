from typing import Optional

class FineredError(Exception):
    pass

class ComparisonModelViolation(FineredError):
    '''
    raised when an input real is read outside the 4-linear comparisons
    '''

class EqualRanks(FineredError):
    pass

class NotSeparable(FineredError):
    pass

class NotAMember(FineredError):
    pass

class BadParams(FineredError):
    pass

class ParseError(FineredError):
    def __init__(self, msg: str, line: Optional[int] = None, field: Optional[str] = None):
        super().__init__(msg)
        self.line = line
        self.field = field

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f'line {self.line}')
        if self.field:
            where.append(f'field {self.field}')
        msg = super().__str__()
        if where:
            return '{} ({})'.format(msg, ', '.join(where))
        return msg

class ValidationFailed(FineredError):
    pass

class NegativeCycleDetected(FineredError):
    pass

class NotTripartite(FineredError):
    pass

class ParallelEdges(FineredError):
    pass

class ShapeMismatch(FineredError):
    pass

class OracleProtocol(FineredError):
    pass

class RetryBudgetExhausted(FineredError):
    pass

class QuadBudgetExceeded(FineredError):
    pass

class BadBucketCount(FineredError):
    pass

class TooManyNodes(FineredError):
    pass

class TooManyColors(FineredError):
    pass

class BadBlock(FineredError):
    pass

class TooManyPerColor(FineredError):
    pass

class NotLight(FineredError):
    pass

class UnknownPipeline(FineredError):
    pass

class MissingLedger(FineredError):
    pass
