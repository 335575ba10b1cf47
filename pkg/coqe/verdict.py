from enum import Enum


class Verdict(Enum):
    PASS = 'pass'
    FLAGGED = 'flagged'
    FAIL = 'fail'

    @classmethod
    def worst(cls, verdicts) -> 'Verdict':
        order = (cls.PASS, cls.FLAGGED, cls.FAIL)
        return max(verdicts, key=order.index, default=cls.PASS)
