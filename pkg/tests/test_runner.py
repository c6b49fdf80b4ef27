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

import json
import time
import pytest
import aligndebate.pipeline.runner as runner
import aligndebate.pipeline.synthetic as synthetic
from aligndebate.config import PipelineConfig
from aligndebate.pipeline.retrieval import read_candidates
from aligndebate.exception import PipelineError


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    directory = tmp_path_factory.mktemp("data")
    synthetic.generate(str(directory), entities=60, seed=1)
    return str(directory)


def config(dataset, out, **values):
    settings = {"data.dir": dataset, "run.out": str(out)}
    settings.update(values)
    return PipelineConfig(settings)


def read_json(path):
    with open(str(path), encoding="utf-8") as f:
        return json.load(f)


def test_oracle_run_is_perfect(dataset, tmp_path):
    report = runner.run_pipeline(config(dataset, tmp_path))
    assert report["hits"]["hits@1"] == 1.0
    assert report["mrr"] == 1.0
    assert report["metadata"]["debated"] > 0
    for name in (runner.CANDIDATES_FILE, runner.DECISIONS_FILE,
                 runner.TRANSCRIPTS_FILE, runner.REPORT_FILE,
                 runner.COST_FILE):
        assert (tmp_path / name).exists()
    assert "log.file" not in report["metadata"]["config"]


def test_oracle_run_resolves_name_collisions(tmp_path):
    data = tmp_path / "data"
    summary = synthetic.generate(str(data), entities=200,
                                 collision_rate=0.3, seed=7)
    assert summary["collision_groups"] == 30
    start = time.monotonic()
    report = runner.run_pipeline(config(str(data), tmp_path / "out"))
    assert time.monotonic() - start < 120
    assert report["hits"]["hits@1"] == 1.0
    assert report["metadata"]["debated"] > 0
    assert report["metadata"]["embedding_baseline"]["hits@1"] < 1.0


def test_abstaining_run_matches_embedding_baseline(dataset, tmp_path):
    report = runner.run_pipeline(config(dataset, tmp_path,
                                        **{"agents.backend": "abstain"}))
    baseline = report["metadata"]["embedding_baseline"]
    assert report["hits"]["hits@1"] == baseline["hits@1"]
    assert report["mrr"] == pytest.approx(baseline["mrr"])
    assert baseline["hits@1"] < 1.0


def test_abstaining_run_keeps_every_retrieved_top1(dataset, tmp_path):
    runner.run_pipeline(config(dataset, tmp_path,
                               **{"agents.backend": "abstain"}))
    candidate_map = read_candidates(str(tmp_path / runner.CANDIDATES_FILE))
    decisions = runner.read_decisions(str(tmp_path / runner.DECISIONS_FILE))
    assert decisions
    for d in decisions:
        assert d.target == candidate_map[d.source].top1


def test_run_is_deterministic(dataset, tmp_path):
    runner.run_pipeline(config(dataset, tmp_path / "a"))
    runner.run_pipeline(config(dataset, tmp_path / "b"))
    for name in (runner.DECISIONS_FILE, runner.TRANSCRIPTS_FILE,
                 runner.CANDIDATES_FILE):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_hits_never_exceed_retrieval_bound(dataset, tmp_path):
    report = runner.run_pipeline(config(dataset, tmp_path))
    bound = report["metadata"]["retrieval_hits@20"]
    assert report["hits"]["hits@1"] <= bound


def test_decisions_cover_every_test_source(dataset, tmp_path):
    cfg = config(dataset, tmp_path)
    runner.run_pipeline(cfg)
    decisions = runner.read_decisions(str(tmp_path / runner.DECISIONS_FILE))
    data = runner.load_dataset(cfg)
    assert [d.source for d in decisions] == sorted(data.tests.sources())
    transcripts = runner.read_transcripts(
        str(tmp_path / runner.TRANSCRIPTS_FILE))
    debated = {t["source"] for t in transcripts}
    for d in decisions:
        if d.source in debated:
            assert d.provenance != "direct"
        else:
            assert d.provenance == "direct"
    cost = read_json(tmp_path / runner.COST_FILE)
    assert cost["entities"] == len(transcripts)
    assert set(cost["stage_seconds"]) == {"load", "embed", "retrieve",
                                          "debate", "evaluate"}


def test_stages_match_full_run(dataset, tmp_path):
    full = runner.run_pipeline(config(dataset, tmp_path / "full"))
    cfg = config(dataset, tmp_path / "staged")
    runner.run_ingest(cfg)
    runner.run_retrieve(cfg)
    runner.run_debate(cfg)
    staged = runner.run_evaluate(cfg)
    assert staged["hits"] == full["hits"]
    assert staged["mrr"] == full["mrr"]


def test_disabled_debate_is_embedding_only(dataset, tmp_path):
    report = runner.run_pipeline(config(
        dataset, tmp_path, **{"debate.enable_ldv": False,
                              "debate.enable_dda": False}))
    baseline = report["metadata"]["embedding_baseline"]
    assert report["hits"]["hits@1"] == baseline["hits@1"]
    assert report["metadata"]["debated"] == 0
    assert list(report["by_provenance"]) == ["direct"]


def test_failing_backend_degrades(dataset, tmp_path):
    fixtures = tmp_path / "empty.jsonl"
    fixtures.write_text("")
    report = runner.run_pipeline(config(
        dataset, tmp_path, **{"agents.backend": "scripted",
                              "agents.fixtures": str(fixtures)}))
    assert "degraded" in report["by_provenance"]
    transcripts = runner.read_transcripts(
        str(tmp_path / runner.TRANSCRIPTS_FILE))
    assert all(t["degraded"] for t in transcripts)


def test_build_corpus_stage(dataset, tmp_path):
    manifest = runner.run_corpus(config(dataset, tmp_path))
    assert manifest["counts"]["positive"] == 18
    assert (tmp_path / runner.CORPUS_FILE).exists()
    assert read_json(tmp_path / runner.CORPUS_MANIFEST_FILE) == manifest
    assert (tmp_path / runner.TRAINER_FILE).exists()


@pytest.mark.parametrize("values,code", [
    ({"data.dir": ""}, runner.EXIT_CONFIG),
    ({"data.dir": "/nonexistent/aligndebate"}, runner.EXIT_DATA),
    ({"agents.backend": "scripted",
      "agents.fixtures": "/nonexistent/fixtures.jsonl"}, runner.EXIT_BACKEND),
    ({"agents.backend": "no_such_backend"}, runner.EXIT_CONFIG),
])
def test_exit_codes(dataset, tmp_path, values, code):
    settings = {"data.dir": dataset, "run.out": str(tmp_path)}
    settings.update(values)
    with pytest.raises(PipelineError) as ex:
        runner.run_pipeline(PipelineConfig(settings))
    assert ex.value.exit_code == code


def test_stage_names_failures(dataset, tmp_path):
    with pytest.raises(PipelineError) as ex:
        runner.run_pipeline(config("/nonexistent/aligndebate", tmp_path))
    assert ex.value.stage == "load"
    assert str(ex.value).startswith("[load]")


def test_read_decisions_rejects_malformed_rows(tmp_path):
    path = tmp_path / "decisions.tsv"
    path.write_text("1\t2\tnot-a-score\tdirect\n")
    with pytest.raises(runner.GraphFormatError):
        runner.read_decisions(str(path))


def test_final_rankings_put_debate_first():
    from aligndebate.pipeline.retrieval import CandidateSet
    cmap = {0: CandidateSet(0, [(5, 0.9), (6, 0.8), (7, 0.7)]),
            1: CandidateSet(1, [(8, 0.9), (9, 0.1)])}
    rankings = runner.final_rankings(cmap, [{"source": 0,
                                             "ranking": [7, 5]}])
    assert rankings == {0: [7, 5, 6], 1: [8, 9]}

