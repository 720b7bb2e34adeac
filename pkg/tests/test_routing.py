"""Question routing: the type->class mapping and both classifiers."""

import json
from pathlib import Path

import pytest

from flowsra.gateway import ChatGateway, mock_backend
from flowsra.routing import (
    ClassificationError,
    HeuristicRouter,
    LlmRouter,
    OracleRouter,
    QuestionClass,
    QuestionType,
    classify,
    heuristic_classify,
    type_to_class,
)

DESK_SET = Path(__file__).parent / "data" / "desk_set.jsonl"


def load_desk_set():
    rows = []
    for line in DESK_SET.read_text().splitlines():
        record = json.loads(line)
        rows.append((record["question"], QuestionType.from_code(record["type"])))
    return rows


class TestTypeToClass:
    def test_applied_scenario_is_the_only_complicated_type(self):
        assert type_to_class(QuestionType.APPLIED_SCENARIO) is QuestionClass.COMPLICATED
        for qtype in (QuestionType.FACT_RETRIEVAL, QuestionType.FLOW_REFERENCE,
                      QuestionType.TOPOLOGY):
            assert type_to_class(qtype) is QuestionClass.STRAIGHT

    def test_total_with_single_complicated_image(self):
        images = [type_to_class(t) for t in QuestionType]
        assert images.count(QuestionClass.COMPLICATED) == 1


class TestHeuristicClassify:
    def test_structural_cues(self):
        assert heuristic_classify("How many edges does the chart contain?") is (
            QuestionClass.STRAIGHT)

    def test_scenario_cues(self):
        assert heuristic_classify("Suppose the test fails, what is the next action?") is (
            QuestionClass.COMPLICATED)
        assert heuristic_classify("If the dough is too dry, what should I do next?") is (
            QuestionClass.COMPLICATED)

    def test_case_insensitive_and_deterministic(self):
        upper = heuristic_classify("SUPPOSE THE PUMP STOPS, WHAT HAPPENS?")
        lower = heuristic_classify("suppose the pump stops, what happens?")
        assert upper is lower is QuestionClass.COMPLICATED

    def test_ties_resolve_straight(self):
        # both cue families fire -> Straight wins
        assert heuristic_classify("If it rains, how many nodes are left?") is (
            QuestionClass.STRAIGHT)

    def test_no_cues_defaults_straight(self):
        assert heuristic_classify("What does the final node say?") is (
            QuestionClass.STRAIGHT)

    def test_desk_set_agreement_at_least_80_percent(self):
        rows = load_desk_set()
        assert len(rows) == 40
        hits = sum(1 for question, gold in rows
                   if heuristic_classify(question) is type_to_class(gold))
        assert hits / len(rows) >= 0.80


class TestClassify:
    def test_scripted_class_line(self):
        result = classify("anything?", lambda prompt: "CLASS: Complicated")
        assert result is QuestionClass.COMPLICATED

    def test_prompt_discloses_classes_and_types(self):
        seen = {}

        def backend(prompt):
            seen["prompt"] = prompt
            return "CLASS: Straight"

        classify("How many nodes?", backend)
        prompt = seen["prompt"]
        for needle in ("Straight", "Complicated", "Fact retrieval",
                       "Applied scenario", "Flow reference", "Topology",
                       "How many nodes?"):
            assert needle in prompt

    def test_retry_then_error(self):
        attempts = []

        def mute(prompt):
            attempts.append(prompt)
            return "no class here"

        with pytest.raises(ClassificationError):
            classify("question?", mute)
        assert len(attempts) == 2
        assert "could not be parsed" in attempts[1]

    def test_retry_can_succeed(self):
        responses = iter(["garbled", "CLASS: Straight"])
        assert classify("q?", lambda p: next(responses)) is QuestionClass.STRAIGHT

    def test_empty_question_rejected(self):
        with pytest.raises(ValueError):
            classify("  ", lambda p: "CLASS: Straight")


class TestRouters:
    def test_oracle_router_follows_gold_types(self):
        router = OracleRouter()
        for question, gold in load_desk_set():
            assert router.classify(question, gold) is type_to_class(gold)

    def test_oracle_router_requires_gold_type(self):
        with pytest.raises(ValueError):
            OracleRouter().classify("q?", None)

    def test_llm_router_over_mock_gateway(self):
        gateway = ChatGateway(mock_backend([("CLASS", "CLASS: Complicated")]))
        router = LlmRouter(gateway, model="router")
        assert router.classify("whatever?", None) is QuestionClass.COMPLICATED

    def test_heuristic_router_matches_function(self):
        router = HeuristicRouter()
        for question, _ in load_desk_set():
            assert router.classify(question) is heuristic_classify(question)
