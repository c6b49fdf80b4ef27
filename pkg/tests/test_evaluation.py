# Copyright 2026 AlignDebate contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# flake8: noqa

import sys
import os

myPath = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, myPath + "/../src/")

import math
import random
import pytest
import aligndebate.pipeline.evaluation as evaluation
from aligndebate.pipeline.evaluation import ABSENT
from aligndebate.exception import EvaluationError


def test_rank_of():
    assert evaluation.rank_of(5, [3, 5, 7]) == 2
    assert evaluation.rank_of(9, [3, 5, 7]) == ABSENT
    assert evaluation.rank_of(9, []) == ABSENT


def test_hits_and_mrr_example():
    ranks = [1, 2, ABSENT, 1]
    assert evaluation.hits_at_k(ranks, 1) == 0.5
    assert evaluation.hits_at_k(ranks, 2) == 0.75
    assert evaluation.mrr(ranks) == pytest.approx((1 + 0.5 + 0 + 1) / 4)


@pytest.mark.parametrize("ranks", [[], [0], [1.5], [-1]])
def test_invalid_ranks(ranks):
    with pytest.raises(EvaluationError):
        evaluation.mrr(ranks)


def test_invalid_k():
    with pytest.raises(EvaluationError):
        evaluation.hits_at_k([1], 0)


def test_metrics_against_brute_force():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 30)
        truth = {s: rng.randrange(40) for s in range(n)}
        rankings = {s: rng.sample(range(40), rng.randint(0, 40))
                    for s in range(n)}
        report = evaluation.evaluate(rankings, truth, ks=(1, 3, 10))
        ranks = []
        for s in range(n):
            ranking = rankings[s]
            ranks.append(ranking.index(truth[s]) + 1
                         if truth[s] in ranking else None)
        for k in (1, 3, 10):
            expected = sum(1 for r in ranks if r is not None and r <= k) / n
            assert report.hits[k] == pytest.approx(expected)
        expected_mrr = sum(1.0 / r for r in ranks if r is not None) / n
        assert report.mrr == pytest.approx(expected_mrr)
        assert report.hits[1] <= report.mrr + 1e-12 <= 1.0 + 1e-12
        assert report.hits[1] <= report.hits[3] <= report.hits[10]
        assert report.n == n


def test_evaluate_missing_ranking_counts_absent():
    report = evaluation.evaluate({0: [1]}, {0: 1, 1: 2})
    assert report.hits[1] == 0.5
    assert report.mrr == 0.5


def test_breakdown_by_provenance():
    rankings = {0: [1], 1: [9, 2], 2: [3], 3: [4]}
    truth = {0: 1, 1: 2, 2: 3, 3: 5}
    provenance = {0: "direct", 1: "dda:2", 2: "dda:1", 3: "ldv"}
    report = evaluation.evaluate(rankings, truth, provenance)
    assert report.by_provenance["direct"] == {"n": 1, "hits@1": 1.0,
                                              "mrr": 1.0}
    assert report.by_provenance["dda"]["n"] == 2
    assert report.by_provenance["dda"]["hits@1"] == 0.5
    assert report.by_provenance["dda"]["mrr"] == pytest.approx(0.75)
    assert report.by_provenance["ldv"]["mrr"] == 0.0


def test_check_upper_bound():
    report = evaluation.evaluate({0: [1], 1: [2]}, {0: 1, 1: 2})
    assert evaluation.check_upper_bound(report, [1, 3], 5) == 1.0
    with pytest.raises(EvaluationError):
        evaluation.check_upper_bound(report, [1, ABSENT], 5)


def test_report_to_json():
    report = evaluation.evaluate({0: [1]}, {0: 1}, ks=(1, 10))
    obj = evaluation.report_to_json(report, {"dataset": "toy"})
    assert obj["hits"] == {"hits@1": 1.0, "hits@10": 1.0}
    assert obj["mrr"] == 1.0
    assert obj["metadata"] == {"dataset": "toy"}
    assert obj["schema_version"] == evaluation.SCHEMA_VERSION
    assert "rank_convention" in obj


def test_report_cost():
    transcripts = [
        {"usage": {"prompt_tokens": 100, "completion_tokens": 20}},
        {"usage": {"prompt_tokens": 50, "completion_tokens": 30}},
    ]
    cost = evaluation.report_cost(transcripts, {"debate": 2.5, "load": 0.5})
    assert cost["entities"] == 2
    assert cost["prompt_tokens"] == 150
    assert cost["completion_tokens"] == 50
    assert cost["total_tokens"] == 200
    assert cost["mean_tokens_per_entity"] == 100.0
    assert list(cost["stage_seconds"]) == ["debate", "load"]


def test_report_cost_empty():
    cost = evaluation.report_cost([])
    assert cost["mean_tokens_per_entity"] == 0.0
    assert cost["stage_seconds"] == {}
