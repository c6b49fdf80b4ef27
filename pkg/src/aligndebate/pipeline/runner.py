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
"""Runs the alignment pipeline end to end, or one stage at a time, and
writes its artifacts to ``run.out``:

* ``candidates.jsonl``: the retrieved candidates of every test source.
* ``decisions.tsv``: ``source \\t target \\t score \\t provenance`` rows.
* ``transcripts.jsonl``: one debate transcript per uncertain entity.
* ``report.json``: the metrics.
* ``cost.json``: token usage and stage timings.
* ``corpus.jsonl``, ``corpus_manifest.json`` and ``trainer.json`` from the
  corpus stage.

Any stage failure is raised as a
:py:class:`~aligndebate.exception.PipelineError` naming the stage; the files
already written are left in place."""

from aligndebate.agents import BackendConfig, get_backend
from aligndebate.exception import (PipelineError, ConfigError,
                                   PluginNotFoundError, GraphFormatError,
                                   DanglingEntityError, EntityNotFoundError,
                                   EmbeddingError, RetrievalError,
                                   CorpusError, EvaluationError,
                                   BackendError, PromptChecksumError,
                                   RenderError)
import aligndebate.pipeline.debate_engine as debate_engine
import aligndebate.pipeline.embedding_index as embedding_index
import aligndebate.pipeline.evaluation as evaluation
import aligndebate.pipeline.kg_store as kg_store
import aligndebate.pipeline.preference_corpus as preference_corpus
import aligndebate.pipeline.retrieval as retrieval
from collections import namedtuple
import contextlib
import json
import logging
import os
import parse
import time

LOGGER = logging.getLogger(__name__)

CANDIDATES_FILE = "candidates.jsonl"
DECISIONS_FILE = "decisions.tsv"
TRANSCRIPTS_FILE = "transcripts.jsonl"
REPORT_FILE = "report.json"
COST_FILE = "cost.json"
CORPUS_FILE = "corpus.jsonl"
CORPUS_MANIFEST_FILE = "corpus_manifest.json"
TRAINER_FILE = "trainer.json"

DECISION_ROW = parse.compile("{:d}\t{:d}\t{:g}\t{}")

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_BACKEND = 4

DATA_ERRORS = (GraphFormatError, DanglingEntityError, EntityNotFoundError,
               EmbeddingError, RetrievalError, CorpusError, EvaluationError,
               PromptChecksumError, RenderError, OSError)

Dataset = namedtuple("Dataset", ["g_s", "g_t", "seeds", "tests"])

DebateResult = namedtuple("DebateResult", ["decisions", "transcripts"])
"""``decisions`` holds one decision per test source, sorted by source;
``transcripts`` holds JSON ready transcripts of the debated ones."""


@contextlib.contextmanager
def stage(name, timings=None):
    """Runs a block as the pipeline stage ``name``, timing it and turning
    its failures into :py:class:`~aligndebate.exception.PipelineError`."""
    LOGGER.info("Stage {0} starting".format(name))
    start = time.monotonic()
    try:
        yield
    except PipelineError:
        raise
    except (ConfigError, PluginNotFoundError) as ex:
        LOGGER.error("[{0}] {1}".format(name, ex))
        raise PipelineError(name, str(ex), EXIT_CONFIG, ex)
    except DATA_ERRORS as ex:
        LOGGER.error("[{0}] {1}".format(name, ex))
        raise PipelineError(name, str(ex), EXIT_DATA, ex)
    except BackendError as ex:
        LOGGER.error("[{0}] {1}".format(name, ex))
        raise PipelineError(name, str(ex), EXIT_BACKEND, ex)
    finally:
        if timings is not None:
            timings[name] = time.monotonic() - start
    LOGGER.info("Stage {0} done".format(name))


def _data_path(cfg, key):
    if not cfg["data.dir"]:
        raise ConfigError("data.dir", "no dataset directory given")
    return os.path.join(cfg["data.dir"], kg_store.DATASET_FILES[key])


def _out_path(cfg, name):
    os.makedirs(cfg["run.out"], exist_ok=True)
    return os.path.join(cfg["run.out"], name)


def _optional(path):
    return path if os.path.exists(path) else None


def load_dataset(cfg):
    """Loads both graphs, the seed pairs and the test pairs.

    :returns: a :py:class:`Dataset`."""
    g_s = kg_store.load_graph(
        _data_path(cfg, "source_entities"), _data_path(cfg, "source_triples"),
        _optional(_data_path(cfg, "source_attributes")), kg_store.Side.SOURCE)
    g_t = kg_store.load_graph(
        _data_path(cfg, "target_entities"), _data_path(cfg, "target_triples"),
        _optional(_data_path(cfg, "target_attributes")), kg_store.Side.TARGET)
    seeds_path = _optional(_data_path(cfg, "seed_pairs"))
    seeds = kg_store.load_seed_pairs(seeds_path, g_s, g_t) \
        if seeds_path is not None else kg_store.SeedPairs([])
    tests = kg_store.load_seed_pairs(_data_path(cfg, "test_pairs"), g_s, g_t)
    LOGGER.info("Loaded {0} source and {1} target entities, {2} seed and {3} "
                "test pairs".format(len(g_s), len(g_t), len(seeds),
                                    len(tests)))
    return Dataset(g_s, g_t, seeds, tests)


def load_stores(cfg, dataset=None):
    """Loads the source and target embedding stores, checking them against
    the graphs when ``dataset`` is given."""
    source = embedding_index.load_embeddings(
        os.path.join(cfg["data.dir"], cfg["data.source_embeddings"]),
        kg_store.Side.SOURCE)
    target = embedding_index.load_embeddings(
        os.path.join(cfg["data.dir"], cfg["data.target_embeddings"]),
        kg_store.Side.TARGET)
    if dataset is not None:
        source.check_graph(dataset.g_s)
        target.check_graph(dataset.g_t)
    return source, target


def build_corpus(cfg, dataset, stores):
    """Mines hard negatives for the seed pairs and writes the preference
    corpus, its manifest and the trainer settings.

    :returns: the corpus manifest."""
    source_store, target_store = stores
    sources = dataset.seeds.sources()
    name_negs = preference_corpus.name_negatives(
        sources, source_store, target_store, dataset.seeds,
        cfg["corpus.floor"], cfg["similarity.chunk_rows"])
    degree_negs = preference_corpus.degree_negatives(dataset.g_s, sources)
    random_negs = []
    if cfg["corpus.random_negatives"]:
        random_negs = preference_corpus.random_negatives(
            sources, dataset.g_t.ids(), dataset.seeds, cfg["corpus.seed"])
    records, manifest = preference_corpus.build_corpus(
        dataset.seeds, name_negs, degree_negs, dataset.g_s, dataset.g_t,
        random_negs, [cfg["data.name"]], cfg["corpus.floor"])
    with open(_out_path(cfg, CORPUS_FILE), "wb") as f:
        f.write(preference_corpus.serialize_corpus(records))
    preference_corpus.write_json(manifest,
                                 _out_path(cfg, CORPUS_MANIFEST_FILE))
    preference_corpus.write_json(preference_corpus.trainer_manifest(),
                                 _out_path(cfg, TRAINER_FILE))
    return manifest


def retrieve(cfg, dataset, stores):
    """Scores the test sources against the target pool and writes their
    candidate sets.

    :returns: a dictionary of source id to
              :py:class:`~aligndebate.pipeline.retrieval.CandidateSet`."""
    source_store, target_store = stores
    sources = source_store.subset(dataset.tests.sources())
    if cfg["retrieval.target_pool"] == "test":
        pool = target_store.subset(sorted(t for _, t in dataset.tests))
    else:
        pool = target_store
    scores = embedding_index.similarity_matrix(
        sources, pool, embedding_index.SimilarityConfig.from_config(cfg))
    candidate_map = retrieval.build_candidates(
        [int(e) for e in sources.ids], [int(t) for t in pool.ids], scores,
        cfg["retrieval.k"])
    retrieval.write_candidates(candidate_map, _out_path(cfg, CANDIDATES_FILE))
    return candidate_map


def debate(cfg, dataset, candidate_map, progress=None):
    """Splits the test sources on ``debate.delta1`` and debates the
    uncertain ones. With both debate stages disabled every source keeps its
    embedding Top-1.

    :param progress: an optional callable receiving the fraction debated.
    :returns: a :py:class:`DebateResult`."""
    debate_cfg = debate_engine.DebateConfig.from_config(cfg)
    uncertain = retrieval.build_uncertain(candidate_map, debate_cfg.delta1)
    if not (debate_cfg.enable_ldv or debate_cfg.enable_dda):
        uncertain = retrieval.UncertainSet(set(), debate_cfg.delta1)
    decisions = {d.source: d for d in
                 retrieval.direct_decisions(candidate_map, uncertain)}
    LOGGER.info("{0} of {1} sources are uncertain".format(
        len(uncertain), len(candidate_map)))

    transcripts = []
    if len(uncertain) > 0:
        backend = get_backend(BackendConfig.from_config(cfg),
                              dataset.tests.as_dict())
        profiles = debate_engine.ProfileBook(
            dataset.g_s, dataset.g_t,
            kg_store.frequency_table(dataset.g_s, dataset.g_t), debate_cfg)
        agents = debate_engine.agents_for(backend)
        for transcript in debate_engine.debate_all(
                uncertain, candidate_map, agents, debate_cfg, profiles,
                progress):
            decisions[transcript.source] = transcript.decision
            transcripts.append(debate_engine.transcript_to_json(transcript))
    result = DebateResult([decisions[s] for s in sorted(decisions)],
                          transcripts)
    write_decisions(result.decisions, _out_path(cfg, DECISIONS_FILE))
    write_transcripts(result.transcripts, _out_path(cfg, TRANSCRIPTS_FILE))
    return result


def write_decisions(decisions, path):
    with open(path, "w", encoding="utf-8") as f:
        for d in decisions:
            f.write("{0}\t{1}\t{2!r}\t{3}\n".format(d.source, d.target,
                                                   float(d.score),
                                                   d.provenance))


def read_decisions(path):
    """Reads a decision file.

    :raises GraphFormatError: for malformed rows."""
    decisions = []
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            result = DECISION_ROW.parse(line)
            if result is None:
                raise GraphFormatError(path, number, "expected 'source<TAB>"
                                       "target<TAB>score<TAB>provenance'")
            decisions.append(retrieval.AlignmentDecision(*result.fixed))
    return decisions


def write_transcripts(transcripts, path):
    with open(path, "w", encoding="utf-8") as f:
        for transcript in transcripts:
            f.write(json.dumps(transcript, sort_keys=True,
                               ensure_ascii=False) + "\n")


def read_transcripts(path):
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def final_rankings(candidate_map, transcripts):
    """Returns the evaluated ranking of every source: the debate's ranking
    followed by the rest of the retrieved candidates, or the retrieved
    order for sources that were not debated."""
    rankings = {s: cs.targets() for s, cs in candidate_map.items()}
    for transcript in transcripts:
        head = list(transcript["ranking"])
        seen = set(head)
        source = transcript["source"]
        rankings[source] = head + [t for t in rankings.get(source, ())
                                   if t not in seen]
    return rankings


def evaluate(cfg, dataset, candidate_map, decisions, transcripts):
    """Scores the run against the test pairs, checks that Hits@1 stays
    within the retrieval bound and writes the report.

    :returns: the report dictionary written."""
    truth = dataset.tests.as_dict()
    provenance = {d.source: d.provenance for d in decisions}
    report = evaluation.evaluate(final_rankings(candidate_map, transcripts),
                                 truth, provenance)
    retrieved = {s: cs.targets() for s, cs in candidate_map.items()}
    retrieval_ranks = [evaluation.rank_of(truth[s], retrieved.get(s, ()))
                       for s in sorted(truth)]
    bound_k = cfg["debate.ladder"][-1]
    bound = evaluation.check_upper_bound(report, retrieval_ranks, bound_k)
    baseline = evaluation.evaluate(retrieved, truth)
    metadata = {
        "dataset": cfg["data.name"],
        "retrieval_hits@{0}".format(bound_k): bound,
        "embedding_baseline": {"hits@1": baseline.hits[1],
                               "mrr": baseline.mrr},
        "debated": len(transcripts),
        "config": {k: v for k, v in cfg.as_dict().items()
                   if not k.startswith("log.")},
    }
    obj = evaluation.report_to_json(report, metadata)
    preference_corpus.write_json(obj, _out_path(cfg, REPORT_FILE))
    LOGGER.info("Hits@1 {0:.4f}, MRR {1:.4f} over {2} test pairs".format(
        report.hits[1], report.mrr, report.n))
    return obj


def run_pipeline(cfg, progress=None):
    """Runs every stage: load, embeddings, retrieval, debate and
    evaluation, writing all artifacts but the corpus.

    :param cfg: a :py:class:`~aligndebate.config.PipelineConfig`.
    :param progress: an optional callable receiving the fraction debated.
    :raises PipelineError: naming the failed stage.
    :returns: the report dictionary."""
    timings = {}
    with stage("load", timings):
        dataset = load_dataset(cfg)
    with stage("embed", timings):
        stores = load_stores(cfg, dataset)
    with stage("retrieve", timings):
        candidate_map = retrieve(cfg, dataset, stores)
    with stage("debate", timings):
        result = debate(cfg, dataset, candidate_map, progress)
    with stage("evaluate", timings):
        report = evaluate(cfg, dataset, candidate_map, result.decisions,
                          result.transcripts)
    preference_corpus.write_json(
        evaluation.report_cost(result.transcripts, timings),
        _out_path(cfg, COST_FILE))
    return report


def run_ingest(cfg):
    """Loads and checks the dataset and its embeddings.

    :returns: a summary dictionary of the counts loaded."""
    with stage("load"):
        dataset = load_dataset(cfg)
    with stage("embed"):
        source, target = load_stores(cfg, dataset)
    return {"source_entities": len(dataset.g_s),
            "target_entities": len(dataset.g_t),
            "seed_pairs": len(dataset.seeds),
            "test_pairs": len(dataset.tests),
            "embedding_dims": list(source.dims)}


def run_corpus(cfg):
    """Builds the preference corpus of the seed pairs.

    :returns: the corpus manifest."""
    with stage("load"):
        dataset = load_dataset(cfg)
    with stage("embed"):
        stores = load_stores(cfg, dataset)
    with stage("corpus"):
        return build_corpus(cfg, dataset, stores)


def run_retrieve(cfg):
    """Retrieves and writes the candidates of the test sources.

    :returns: the candidate map."""
    with stage("load"):
        dataset = load_dataset(cfg)
    with stage("embed"):
        stores = load_stores(cfg, dataset)
    with stage("retrieve"):
        return retrieve(cfg, dataset, stores)


def run_debate(cfg, progress=None):
    """Debates the uncertain sources of a previous retrieval stage.

    :returns: a :py:class:`DebateResult`."""
    with stage("load"):
        dataset = load_dataset(cfg)
    with stage("debate"):
        candidate_map = retrieval.read_candidates(
            os.path.join(cfg["run.out"], CANDIDATES_FILE))
        return debate(cfg, dataset, candidate_map, progress)


def run_evaluate(cfg):
    """Scores the artifacts of previous retrieval and debate stages.

    :returns: the report dictionary."""
    with stage("load"):
        dataset = load_dataset(cfg)
    with stage("evaluate"):
        candidate_map = retrieval.read_candidates(
            os.path.join(cfg["run.out"], CANDIDATES_FILE))
        decisions = read_decisions(
            os.path.join(cfg["run.out"], DECISIONS_FILE))
        transcripts = read_transcripts(
            os.path.join(cfg["run.out"], TRANSCRIPTS_FILE))
        return evaluate(cfg, dataset, candidate_map, decisions, transcripts)
