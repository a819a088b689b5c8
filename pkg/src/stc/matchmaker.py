"""g-subsumption: classify a pair of g-codes into the 5-ary match space."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import total_ordering

from .errors import MatchContractError, StaleCodeError
from .ontology import BCode
from .service import GCode


@total_ordering
class MatchStrength(enum.Enum):
    """Ordered match cases.  Only comparison is meaningful, not arithmetic."""

    NO_MATCH = 0
    SIBLING = 1
    SUBSUME = 2
    PLUG_IN = 3
    EXACT = 4

    def __lt__(self, other):
        if not isinstance(other, MatchStrength):
            return NotImplemented
        return self.value < other.value


NO_MATCH = MatchStrength.NO_MATCH
SIBLING = MatchStrength.SIBLING
SUBSUME = MatchStrength.SUBSUME
PLUG_IN = MatchStrength.PLUG_IN
EXACT = MatchStrength.EXACT


@dataclass(frozen=True)
class MatchResult:
    strength: MatchStrength
    abstract_parent: GCode | None = None


def classify(a: int, b: int) -> MatchStrength:
    """Match strength of raw code ``a`` against raw code ``b``.

    PLUG_IN means ``a`` is subsumed by ``b`` (``a`` carries every bit of
    ``b``); SUBSUME is the converse.
    """
    if a == b:
        return EXACT
    u = a | b
    if u == a:
        return PLUG_IN
    if u == b:
        return SUBSUME
    if a & b:
        return SIBLING
    return NO_MATCH


def g_subsumption(code1: GCode, code2: GCode) -> MatchResult:
    if code1.feature != code2.feature:
        raise MatchContractError(f"cannot compare {code1.feature}-code with {code2.feature}-code")
    if code1.generation != code2.generation:
        raise StaleCodeError(f"g-codes from generations {code1.generation} and {code2.generation}")
    strength = classify(code1.value, code2.value)
    if strength is SIBLING:
        parent = BCode(code1.value & code2.value, max(code1.code.width, code2.code.width), code1.generation)
        return MatchResult(strength, GCode(code1.feature, parent))
    return MatchResult(strength)
