"""Dataset ingestion, answer judging, and accuracy/routing reports.

Datasets are line-delimited JSON records (``id``, ``dialect``, ``source``,
``question``, ``answer``, ``type``). Judging is tiered: cheap textual
normalization first, an LLM judge only for pairs normalization cannot
settle. Reports carry no wall-clock data, so identical runs render
byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .emitting import emit
from .engine import Question, Route, answer_deep, answer_shallow
from .gateway import ChatGateway, completion_backend
from .ir import FlowGraph, topology_stats
from .parsing import Dialect, parse_text
from .prompts import load_template
from .relations import make_relation_backend, upgrade_graph
from .routing import (
    ClassificationError,
    QuestionClass,
    QuestionType,
    make_router,
    type_to_class,
)


class EmptyDatasetError(ValueError):
    """The dataset file yielded zero valid records."""


@dataclass(frozen=True)
class EvalInstance:
    flowchart_id: str
    dialect: Dialect
    source: str
    question: Question
    gold_answer: str
    gold_type: QuestionType


@dataclass(frozen=True)
class LoadDiagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f"record {self.line}: {self.message}"


@dataclass
class DatasetLoad:
    instances: list[EvalInstance]
    diagnostics: list[LoadDiagnostic]


_REQUIRED_FIELDS = ("id", "dialect", "source", "question", "answer", "type")


def load_dataset(path: str | Path) -> DatasetLoad:
    """Read line-delimited records; malformed ones become diagnostics.

    Raises OSError when the file cannot be read and EmptyDatasetError when
    nothing valid remains.
    """
    text = Path(path).read_text(encoding="utf-8")
    instances: list[EvalInstance] = []
    diagnostics: list[LoadDiagnostic] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(LoadDiagnostic(lineno, f"invalid JSON: {exc.msg}"))
            continue
        missing = [f for f in _REQUIRED_FIELDS if f not in record]
        if missing:
            diagnostics.append(LoadDiagnostic(lineno, f"missing fields: {missing}"))
            continue
        try:
            dialect = Dialect(str(record["dialect"]).casefold())
            qtype = QuestionType.from_code(str(record["type"]))
            question = Question(str(record["question"]), gold_type=qtype)
        except ValueError as exc:
            diagnostics.append(LoadDiagnostic(lineno, str(exc)))
            continue
        instances.append(EvalInstance(
            flowchart_id=str(record["id"]),
            dialect=dialect,
            source=str(record["source"]),
            question=question,
            gold_answer=str(record["answer"]),
            gold_type=qtype,
        ))
    if not instances:
        raise EmptyDatasetError(f"no valid records in {path}")
    return DatasetLoad(instances, diagnostics)


# --- judging -----------------------------------------------------------------

_NUMBER_WORDS = {
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
    "ten": "10", "eleven": "11", "twelve": "12", "thirteen": "13",
    "fourteen": "14", "fifteen": "15", "sixteen": "16", "seventeen": "17",
    "eighteen": "18", "nineteen": "19", "twenty": "20",
}


def normalize_answer(text: str) -> str:
    """Lowercase, trim, drop terminal punctuation, spell small numbers as digits."""
    cleaned = text.strip().lower()
    cleaned = re.sub(r"[.!?]+$", "", cleaned).strip()
    tokens = [_NUMBER_WORDS.get(tok, tok) for tok in cleaned.split()]
    return " ".join(tokens)


_VERDICT_LINE = re.compile(r"verdict\s*[:\-]\s*(correct|incorrect)", re.IGNORECASE)

_JUDGE_RETRY = (
    "\n\nYour previous answer could not be parsed. Answer again with exactly "
    "one line: VERDICT: CORRECT or VERDICT: INCORRECT."
)


@dataclass(frozen=True)
class JudgeResult:
    correct: bool
    tier: int           # 1 = normalization, 2 = LLM judge
    judge_failed: bool = False


def _parse_verdict(text: str) -> bool | None:
    for line in reversed(text.splitlines()):
        m = _VERDICT_LINE.search(re.sub(r"[*_`#>]", "", line))
        if m:
            return m.group(1).casefold() == "correct"
    return None


def judge(prediction: str, gold: str,
          judge_backend: Callable[[str], str] | None = None) -> JudgeResult:
    """Tier 1: normalized textual equality, no LLM involved. Tier 2: the
    judge backend decides; an unparseable verdict counts as incorrect."""
    if normalize_answer(prediction) == normalize_answer(gold):
        return JudgeResult(correct=True, tier=1)
    if judge_backend is None:
        return JudgeResult(correct=False, tier=1)
    prompt = load_template("judge.txt").format(prediction=prediction, gold=gold)
    verdict = _parse_verdict(judge_backend(prompt))
    if verdict is None:
        verdict = _parse_verdict(judge_backend(prompt + _JUDGE_RETRY))
    if verdict is None:
        return JudgeResult(correct=False, tier=2, judge_failed=True)
    return JudgeResult(correct=verdict, tier=2)


# --- topology oracle ---------------------------------------------------------

_COUNT_LEAD = r"(?:how many|number of|count(?: of| the number of)?|total count of)"
_DECISION_Q = re.compile(_COUNT_LEAD + r"\b.*\bdecision", re.IGNORECASE)
_EDGE_Q = re.compile(_COUNT_LEAD + r"\b.*\b(edges?|arrows?|connections?|links?)\b",
                     re.IGNORECASE)
_NODE_Q = re.compile(_COUNT_LEAD + r"\b.*\b(nodes?|steps?|boxes)\b", re.IGNORECASE)


def topology_oracle(graph: FlowGraph, question: Question) -> str | None:
    """Deterministic answers for structural count questions; None when the
    question does not match a recognized pattern."""
    stats = topology_stats(graph)
    text = question.text
    if _DECISION_Q.search(text):
        return str(stats.decision_count)
    if _EDGE_Q.search(text):
        return str(stats.edge_count)
    if _NODE_Q.search(text):
        return str(stats.node_count)
    return None


# --- evaluation --------------------------------------------------------------

ROUTE_MODES = ("llm", "heuristic", "oracle", "always-shallow", "always-deep")


@dataclass(frozen=True)
class EvalConfig:
    """One pipeline variant: which router, recognizer, judge, and dialect."""

    router_mode: str = "heuristic"
    relation_backend: str = "heuristic"
    judge_mode: str = "exact"            # "exact" (tier 1 only) or "llm"
    dialect: Dialect | None = None       # None: keep each instance's dialect
    filter_type: QuestionType | None = None
    reasoner_model: str = "reasoner"
    recognizer_model: str = "recognizer"
    router_model: str = "router"
    judge_model: str = "judge"
    max_tokens: int = 256
    include_basic_in_deep: bool = False
    recognizer_parallelism: int = 1

    def fingerprint(self) -> str:
        payload = json.dumps({
            "router_mode": self.router_mode,
            "relation_backend": self.relation_backend,
            "judge_mode": self.judge_mode,
            "dialect": self.dialect.value if self.dialect else None,
            "filter_type": self.filter_type.value if self.filter_type else None,
            "reasoner_model": self.reasoner_model,
            "recognizer_model": self.recognizer_model,
            "router_model": self.router_model,
            "judge_model": self.judge_model,
            "max_tokens": self.max_tokens,
            "include_basic_in_deep": self.include_basic_in_deep,
        }, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class InstanceLog:
    """Audit record for one instance; always emitted."""

    flowchart_id: str
    question: str
    gold_answer: str
    gold_type: QuestionType
    skipped: bool = False
    error: str | None = None
    route: Route | None = None
    predicted: str | None = None
    correct: bool | None = None
    judge_tier: int | None = None
    judge_failed: bool = False
    prompt_fingerprint: str | None = None
    fallbacks_used: int = 0
    edge_count: int = 0

    def to_dict(self) -> dict:
        return {
            "flowchart_id": self.flowchart_id,
            "question": self.question,
            "gold_answer": self.gold_answer,
            "gold_type": self.gold_type.value,
            "skipped": self.skipped,
            "error": self.error,
            "route": self.route.value if self.route else None,
            "predicted": self.predicted,
            "correct": self.correct,
            "judge_tier": self.judge_tier,
            "judge_failed": self.judge_failed,
            "prompt_fingerprint": self.prompt_fingerprint,
            "fallbacks_used": self.fallbacks_used,
            "edge_count": self.edge_count,
        }


@dataclass
class EvalReport:
    overall_acc: float
    per_type_acc: dict[QuestionType, float | None]
    route_counts: dict[tuple[QuestionType, Route], int]
    discriminator_confusion: dict[tuple[QuestionType, QuestionClass], int]
    fallback_rate: float
    skipped_count: int
    failed_count: int
    judge_failures: int
    total: int
    correct: int
    run_config_fingerprint: str

    def to_dict(self) -> dict:
        return {
            "overall_acc": self.overall_acc,
            "total": self.total,
            "correct": self.correct,
            "per_type_acc": {t.value: self.per_type_acc.get(t)
                             for t in QuestionType},
            "route_counts": {
                f"{t.value}/{r.value}": self.route_counts.get((t, r), 0)
                for t in QuestionType for r in Route
            },
            "discriminator_confusion": {
                f"{t.value}/{c.value}": self.discriminator_confusion.get((t, c), 0)
                for t in QuestionType for c in QuestionClass
            },
            "fallback_rate": self.fallback_rate,
            "skipped_count": self.skipped_count,
            "failed_count": self.failed_count,
            "judge_failures": self.judge_failures,
            "run_config_fingerprint": self.run_config_fingerprint,
        }


@dataclass
class EvalRun:
    report: EvalReport
    logs: list[InstanceLog] = field(default_factory=list)


def _route_question(config: EvalConfig, router, instance: EvalInstance) -> QuestionClass:
    if config.router_mode == "always-shallow":
        return QuestionClass.STRAIGHT
    if config.router_mode == "always-deep":
        return QuestionClass.COMPLICATED
    try:
        return router.classify(instance.question.text, instance.gold_type)
    except ClassificationError:
        return QuestionClass.COMPLICATED


def run_eval(instances: Iterable[EvalInstance], config: EvalConfig,
             gateway: ChatGateway) -> EvalRun:
    """Run the configured pipeline per instance and aggregate the report.

    Instance-level failures are recorded and the run continues; parse errors
    in the source flag the instance as skipped.
    """
    router = None
    if config.router_mode in ("llm", "heuristic", "oracle"):
        router = make_router(config.router_mode, gateway, config.router_model)
    recognizer = make_relation_backend(config.relation_backend, gateway,
                                       config.recognizer_model)
    judge_backend = None
    if config.judge_mode == "llm":
        judge_backend = completion_backend(gateway, config.judge_model, max_tokens=64)

    logs: list[InstanceLog] = []
    route_counts: dict[tuple[QuestionType, Route], int] = {}
    confusion: dict[tuple[QuestionType, QuestionClass], int] = {}
    total_triples = 0
    total_fallbacks = 0

    for instance in instances:
        if config.filter_type and instance.gold_type is not config.filter_type:
            continue
        log = InstanceLog(
            flowchart_id=instance.flowchart_id,
            question=instance.question.text,
            gold_answer=instance.gold_answer,
            gold_type=instance.gold_type,
        )
        logs.append(log)
        result = parse_text(instance.source, instance.dialect)[1]
        if result.errors():
            log.skipped = True
            log.error = "; ".join(str(d) for d in result.errors())
            continue
        graph = result.graph
        dialect = config.dialect or instance.dialect
        log.edge_count = len(graph.edges)
        try:
            question_class = _route_question(config, router, instance)
            confusion[(instance.gold_type, question_class)] = (
                confusion.get((instance.gold_type, question_class), 0) + 1)
            if question_class is QuestionClass.STRAIGHT:
                answer = answer_shallow(
                    emit(graph, dialect), instance.question, gateway,
                    model=config.reasoner_model, max_tokens=config.max_tokens)
            else:
                ug = upgrade_graph(graph, recognizer, dialect=dialect,
                                   parallelism=config.recognizer_parallelism)
                total_triples += len(ug.triples)
                total_fallbacks += ug.fallback_count()
                answer = answer_deep(
                    ug, instance.question, gateway,
                    model=config.reasoner_model, dialect=dialect,
                    max_tokens=config.max_tokens,
                    include_basic=config.include_basic_in_deep)
        except Exception as exc:  # keep the batch alive, record the failure
            log.error = f"{type(exc).__name__}: {exc}"
            continue
        log.route = answer.route
        log.predicted = answer.text
        log.prompt_fingerprint = answer.prompt_fingerprint
        log.fallbacks_used = answer.fallbacks_used
        route_counts[(instance.gold_type, answer.route)] = (
            route_counts.get((instance.gold_type, answer.route), 0) + 1)
        verdict = judge(answer.text, instance.gold_answer, judge_backend)
        log.correct = verdict.correct
        log.judge_tier = verdict.tier
        log.judge_failed = verdict.judge_failed

    skipped = sum(1 for log in logs if log.skipped)
    failed = sum(1 for log in logs if log.error is not None and not log.skipped)
    answered = [log for log in logs if log.correct is not None]
    correct = sum(1 for log in answered if log.correct)
    scored = len(logs) - skipped
    per_type: dict[QuestionType, float | None] = {}
    for qtype in QuestionType:
        of_type = [log for log in answered if log.gold_type is qtype]
        scored_of_type = [log for log in logs
                          if log.gold_type is qtype and not log.skipped]
        if not scored_of_type:
            per_type[qtype] = None
        else:
            per_type[qtype] = (sum(1 for log in of_type if log.correct)
                               / len(scored_of_type))
    report = EvalReport(
        overall_acc=(correct / scored) if scored else 0.0,
        per_type_acc=per_type,
        route_counts=route_counts,
        discriminator_confusion=confusion,
        fallback_rate=(total_fallbacks / total_triples) if total_triples else 0.0,
        skipped_count=skipped,
        failed_count=failed,
        judge_failures=sum(1 for log in logs if log.judge_failed),
        total=len(logs),
        correct=correct,
        run_config_fingerprint=config.fingerprint(),
    )
    return EvalRun(report=report, logs=logs)


@dataclass
class ConfusionResult:
    matrix: dict[tuple[QuestionType, QuestionClass], int]
    errors: int


def discriminator_confusion(instances: Iterable[EvalInstance],
                            router) -> ConfusionResult:
    """Gold type vs predicted class counts; an error is any prediction that
    disagrees with the type's canonical class."""
    matrix: dict[tuple[QuestionType, QuestionClass], int] = {}
    errors = 0
    for instance in instances:
        predicted = router.classify(instance.question.text, instance.gold_type)
        matrix[(instance.gold_type, predicted)] = (
            matrix.get((instance.gold_type, predicted), 0) + 1)
        if predicted is not type_to_class(instance.gold_type):
            errors += 1
    return ConfusionResult(matrix, errors)


# --- rendering ---------------------------------------------------------------

def _fmt_acc(value: float | None) -> str:
    return "-" if value is None else f"{100.0 * value:.1f}"


def report_render(report: EvalReport, fmt: str = "json") -> str:
    """Deterministic serialization of a report (json, csv, or markdown)."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        rows = [("metric", "value"),
                ("overall_acc", f"{report.overall_acc:.6f}")]
        for qtype in QuestionType:
            value = report.per_type_acc.get(qtype)
            rows.append((f"acc_{qtype.value}",
                         "" if value is None else f"{value:.6f}"))
        for qtype in QuestionType:
            for route in Route:
                rows.append((f"route_{qtype.value}_{route.value}",
                             str(report.route_counts.get((qtype, route), 0))))
        rows += [
            ("fallback_rate", f"{report.fallback_rate:.6f}"),
            ("skipped_count", str(report.skipped_count)),
            ("failed_count", str(report.failed_count)),
            ("judge_failures", str(report.judge_failures)),
            ("total", str(report.total)),
            ("correct", str(report.correct)),
            ("run_config_fingerprint", report.run_config_fingerprint),
        ]
        return "\n".join(",".join(row) for row in rows) + "\n"
    if fmt == "markdown":
        lines = [
            "| Run | Overall | TP1 | TP2 | TP3 | TP4 |",
            "|---|---|---|---|---|---|",
            "| "
            + " | ".join([
                report.run_config_fingerprint[:12],
                _fmt_acc(report.overall_acc if report.total - report.skipped_count else None),
                *(_fmt_acc(report.per_type_acc.get(t)) for t in QuestionType),
            ])
            + " |",
            "",
            f"- instances: {report.total} (skipped {report.skipped_count}, "
            f"failed {report.failed_count})",
            f"- fallback rate: {report.fallback_rate:.3f}",
            f"- judge failures: {report.judge_failures}",
            "- routes: "
            + ", ".join(
                f"{t.value}/{r.value}={report.route_counts.get((t, r), 0)}"
                for t in QuestionType for r in Route
            ),
        ]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
