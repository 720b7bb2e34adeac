"""Classify questions as Straight or Complicated to pick the reasoning depth.

Only applied-scenario questions need reasoning over semantic relations; the
other three kinds read the chart structure directly, so they route to
shallow reasoning. Classifier failures default to Complicated because deep
reasoning tolerates misrouted questions better than shallow reasoning does.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .gateway import ChatGateway, completion_backend
from .prompts import load_template


class QuestionType(Enum):
    FACT_RETRIEVAL = "TP1"
    APPLIED_SCENARIO = "TP2"
    FLOW_REFERENCE = "TP3"
    TOPOLOGY = "TP4"

    @classmethod
    def from_code(cls, code: str) -> "QuestionType":
        for member in cls:
            if member.value == code.strip().upper():
                return member
        raise ValueError(f"unknown question type {code!r}")


class QuestionClass(Enum):
    STRAIGHT = "Straight"
    COMPLICATED = "Complicated"


class ClassificationError(RuntimeError):
    """Classifier output stayed unparseable after the retry."""


def type_to_class(question_type: QuestionType) -> QuestionClass:
    """Only applied-scenario questions need deep relation reasoning."""
    if question_type is QuestionType.APPLIED_SCENARIO:
        return QuestionClass.COMPLICATED
    return QuestionClass.STRAIGHT


_SCENARIO_CUES = re.compile(
    r"^(if|when|suppose)\b|what happens|in the scenario|should i\b",
    re.IGNORECASE,
)
_STRUCTURAL_CUES = re.compile(
    r"how many|count|which node|next step after|directly connected",
    re.IGNORECASE,
)


def heuristic_classify(question: str) -> QuestionClass:
    """Cue-based stand-in for the learned discriminator.

    Scenario cues say Complicated, structural/reference cues say Straight;
    when both or neither fire, Straight wins.
    """
    text = question.strip()
    scenario = bool(_SCENARIO_CUES.search(text))
    structural = bool(_STRUCTURAL_CUES.search(text))
    if scenario and not structural:
        return QuestionClass.COMPLICATED
    return QuestionClass.STRAIGHT


_CLASS_LINE = re.compile(r"class\s*[:\-]\s*(straight|complicated)", re.IGNORECASE)

_RETRY_REMINDER = (
    "\n\nYour previous answer could not be parsed. Answer again with exactly "
    "one line: CLASS: Straight or CLASS: Complicated."
)


def _parse_class(text: str) -> QuestionClass | None:
    for line in reversed(text.splitlines()):
        cleaned = re.sub(r"[*_`#>]", "", line)
        m = _CLASS_LINE.search(cleaned)
        if m:
            return (QuestionClass.STRAIGHT if m.group(1).casefold() == "straight"
                    else QuestionClass.COMPLICATED)
    return None


def classify(question: str, backend: Callable[[str], str]) -> QuestionClass:
    """Run a prompt-based classifier backend and normalize its output.

    ``backend`` maps a rendered prompt to raw response text. One retry with
    an explicit format reminder; after that ClassificationError.
    """
    if not question.strip():
        raise ValueError("question must be non-empty")
    prompt = load_template("router.txt").format(question=question)
    parsed = _parse_class(backend(prompt))
    if parsed is not None:
        return parsed
    parsed = _parse_class(backend(prompt + _RETRY_REMINDER))
    if parsed is not None:
        return parsed
    raise ClassificationError(f"unparseable class for question {question!r}")


@dataclass
class HeuristicRouter:
    name: str = "heuristic"

    def classify(self, question: str,
                 gold_type: QuestionType | None = None) -> QuestionClass:
        return heuristic_classify(question)


@dataclass
class LlmRouter:
    gateway: ChatGateway
    model: str
    name: str = "llm"

    def classify(self, question: str,
                 gold_type: QuestionType | None = None) -> QuestionClass:
        return classify(question,
                        completion_backend(self.gateway, self.model, max_tokens=64))


@dataclass
class OracleRouter:
    """Maps the dataset's gold type through type_to_class, for ablations."""

    name: str = "oracle"

    def classify(self, question: str,
                 gold_type: QuestionType | None = None) -> QuestionClass:
        if gold_type is None:
            raise ValueError("oracle routing needs a gold question type")
        return type_to_class(gold_type)


def make_router(kind: str, gateway: ChatGateway | None = None, model: str = ""):
    """CLI-facing selector: ``heuristic``, ``llm``, or ``oracle``."""
    if kind == "heuristic":
        return HeuristicRouter()
    if kind == "oracle":
        return OracleRouter()
    if kind == "llm":
        if gateway is None:
            raise ValueError("the llm router needs a gateway")
        return LlmRouter(gateway, model or "default")
    raise ValueError(f"unknown router {kind!r}")
