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
"""Ranking metrics and run reports."""

from aligndebate.exception import EvaluationError
from collections import namedtuple, defaultdict
import logging
import math

LOGGER = logging.getLogger(__name__)

ABSENT = math.inf
"""Rank of a true counterpart missing from the evaluated ranking."""

DEFAULT_KS = (1, 5, 10)

SCHEMA_VERSION = 1

RANK_CONVENTION = ("Debated entities rank the decided target first, then "
                   "the other debated candidates by final aggregate score, "
                   "then the remaining retrieved candidates in embedding "
                   "order. Other entities use the embedding order.")

MetricReport = namedtuple("MetricReport",
                          ["hits", "mrr", "n", "by_provenance"])
"""``hits`` maps K to Hits@K; ``by_provenance`` maps a decision provenance
to a dictionary of ``n``, ``hits@1`` and ``mrr``."""


def _check_ranks(ranks):
    if len(ranks) == 0:
        raise EvaluationError("Cannot evaluate an empty rank list")
    for r in ranks:
        if r != ABSENT and (r < 1 or int(r) != r):
            raise EvaluationError("Invalid rank {0}".format(r))


def rank_of(truth, ranking):
    """Returns the 1 based position of ``truth`` in ``ranking``, or
    :py:data:`ABSENT`."""
    for position, target in enumerate(ranking, 1):
        if target == truth:
            return position
    return ABSENT


def hits_at_k(ranks, k):
    """Returns the fraction of ranks no greater than ``k``.

    :raises EvaluationError: if ``k`` is below 1 or ``ranks`` is empty."""
    if k < 1:
        raise EvaluationError("K must be at least 1, got {0}".format(k))
    _check_ranks(ranks)
    return sum(1 for r in ranks if r <= k) / len(ranks)


def mrr(ranks):
    """Returns the mean reciprocal rank. Absent counterparts count 0.

    :raises EvaluationError: if ``ranks`` is empty."""
    _check_ranks(ranks)
    return math.fsum(0.0 if r == ABSENT else 1.0 / r
                     for r in ranks) / len(ranks)


def evaluate(rankings, truth, provenance=None, ks=DEFAULT_KS):
    """Computes the metric report of a run.

    :param rankings: a dictionary of source id to ranked target ids.
    :param truth: a dictionary of source id to true target id. Every source
                  here is evaluated.
    :param provenance: an optional dictionary of source id to the decision
                       provenance, used for the breakdown.
    :param ks: the cut-offs reported.
    :raises EvaluationError: if the metrics break Hits@1 <= MRR <= 1 or
                             monotony in K.
    :returns: a :py:class:`MetricReport`."""
    sources = sorted(truth)
    ranks = [rank_of(truth[s], rankings.get(s, ())) for s in sources]
    hits = {k: hits_at_k(ranks, k) for k in sorted(ks)}
    value = mrr(ranks)
    ordered = [hits[k] for k in sorted(hits)]
    if any(b < a for a, b in zip(ordered, ordered[1:])):
        raise EvaluationError("Hits@K decreases with K: {0}".format(hits))
    hits1 = hits_at_k(ranks, 1)
    if not hits1 <= value + 1e-12 or value > 1.0:
        raise EvaluationError("MRR {0} outside [Hits@1 {1}, 1]".format(
            value, hits1))

    breakdown = {}
    if provenance is not None:
        groups = defaultdict(list)
        for s, r in zip(sources, ranks):
            groups[_group(provenance.get(s, "unknown"))].append(r)
        for name in sorted(groups):
            breakdown[name] = {"n": len(groups[name]),
                               "hits@1": hits_at_k(groups[name], 1),
                               "mrr": mrr(groups[name])}
    return MetricReport(hits, value, len(ranks), breakdown)


def _group(provenance):
    # every deep debate round reports as one group
    return provenance.split(":", 1)[0]


def check_upper_bound(report, retrieval_ranks, k):
    """Checks that the pipeline's Hits@1 does not exceed the retrieval
    stage's Hits@``k``.

    :raises EvaluationError: if it does.
    :returns: the retrieval Hits@``k``."""
    bound = hits_at_k(retrieval_ranks, k)
    if 1 not in report.hits:
        raise EvaluationError("The report has no Hits@1")
    if report.hits[1] > bound:
        raise EvaluationError("Hits@1 {0} exceeds retrieval Hits@{1} {2}"
                              .format(report.hits[1], k, bound))
    return bound


def report_to_json(report, metadata=None):
    """Returns a JSON ready dictionary of ``report``."""
    obj = {
        "schema_version": SCHEMA_VERSION,
        "n": report.n,
        "hits": {"hits@{0}".format(k): report.hits[k]
                 for k in sorted(report.hits)},
        "mrr": report.mrr,
        "by_provenance": report.by_provenance,
        "rank_convention": RANK_CONVENTION,
    }
    if metadata:
        obj["metadata"] = metadata
    return obj


def report_cost(transcripts, timings=None):
    """Sums the token usage of debate transcripts.

    :param transcripts: transcript dictionaries, each holding ``usage``.
    :param timings: an optional dictionary of stage name to seconds.
    :returns: a dictionary of totals, the mean tokens per entity and the
              stage timings."""
    prompt = sum(t["usage"]["prompt_tokens"] for t in transcripts)
    completion = sum(t["usage"]["completion_tokens"] for t in transcripts)
    total = prompt + completion
    count = len(transcripts)
    return {
        "entities": count,
        "prompt_tokens": prompt,
        "completion_tokens": completion,
        "total_tokens": total,
        "mean_tokens_per_entity": total / count if count else 0.0,
        "stage_seconds": dict(sorted((timings or {}).items())),
    }
