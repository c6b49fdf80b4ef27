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
"""Builds ranked candidate sets, splits source entities into confident and
uncertain ones, and emits direct decisions for the confident ones."""

from aligndebate.exception import RetrievalError, ConfigError
from aligndebate.pipeline.embedding_index import top_k
from collections import namedtuple
import json
import logging
import numpy as np

LOGGER = logging.getLogger(__name__)

EMBEDDING = "embedding"
LDV_RERANK = "ldv_rerank"

DIRECT = "direct"
LDV = "ldv"


def dda_provenance(round_index):
    """Returns the provenance string of a decision reached in deep debate
    round ``round_index``."""
    return "dda:{0}".format(round_index)


AlignmentDecision = namedtuple("AlignmentDecision",
                               ["source", "target", "score", "provenance"])


class CandidateSet(object):
    """The ranked candidates of one source entity.

    :param source: the source entity id.
    :param candidates: a list of ``(target id, score)`` sorted by descending
                       score.
    :param created_from: :py:data:`EMBEDDING` or :py:data:`LDV_RERANK`.
    :param prior: a dictionary of target id to embedding score. Defaults to
                  the candidate scores.
    :raises RetrievalError: if the list is empty, repeats a target or is not
                            sorted."""

    def __init__(self, source, candidates, created_from=EMBEDDING,
                 prior=None):
        candidates = [(int(t), float(s)) for t, s in candidates]
        if not candidates:
            raise RetrievalError("Source {0} has no candidates".format(source))
        targets = [t for t, _ in candidates]
        if len(set(targets)) != len(targets):
            raise RetrievalError(
                "Source {0} lists a candidate twice".format(source))
        scores = [s for _, s in candidates]
        if any(b > a for a, b in zip(scores, scores[1:])):
            raise RetrievalError(
                "Candidates of source {0} are not sorted".format(source))
        self.source = source
        self.candidates = tuple(candidates)
        self.created_from = created_from
        self.prior = dict(prior) if prior is not None else dict(candidates)

    def __len__(self):
        return len(self.candidates)

    def __eq__(self, other):
        if not isinstance(other, CandidateSet):
            return NotImplemented
        return (self.source == other.source
                and self.candidates == other.candidates
                and self.created_from == other.created_from)

    def __repr__(self):
        return "CandidateSet({0}, {1})".format(self.source,
                                               list(self.candidates))

    def targets(self):
        return [t for t, _ in self.candidates]

    @property
    def top1(self):
        return self.candidates[0][0]

    @property
    def s1(self):
        return self.candidates[0][1]

    @property
    def s2(self):
        if len(self.candidates) < 2:
            raise RetrievalError(
                "Source {0} has a single candidate".format(self.source))
        return self.candidates[1][1]

    def head(self, k):
        """Returns the first ``k`` candidates as a new set."""
        return CandidateSet(self.source, self.candidates[:k],
                            self.created_from, self.prior)


def gap(cs):
    """Returns ``s1 - s2``, the score gap between the first two candidates.

    :raises RetrievalError: if ``cs`` has fewer than two candidates."""
    return cs.s1 - cs.s2


def build_candidates(source_ids, target_ids, scores, k=20):
    """Ranks the targets of every source.

    :param source_ids: the source ids, one per row of ``scores``.
    :param target_ids: the target ids, one per column of ``scores``.
    :param scores: a ``(len(source_ids), len(target_ids))`` matrix.
    :param k: candidates kept per source.
    :raises RetrievalError: if there are no targets or fewer than ``k``.
    :returns: a dictionary of source id to :py:class:`CandidateSet`."""
    target_ids = np.asarray(target_ids, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    if target_ids.size == 0:
        raise RetrievalError("The target side is empty")
    if scores.shape != (len(source_ids), target_ids.size):
        raise RetrievalError("Score matrix of shape {0} does not match {1} "
                             "sources and {2} targets".format(
                                 scores.shape, len(source_ids),
                                 target_ids.size))
    if k > target_ids.size:
        raise RetrievalError("Cannot retrieve {0} candidates from {1} targets"
                             .format(k, target_ids.size))
    order = np.argsort(target_ids, kind="stable")
    target_ids = target_ids[order]
    scores = scores[:, order]
    result = {}
    for row, source in enumerate(source_ids):
        ranked = [(int(target_ids[i]), s) for i, s in top_k(scores[row], k)]
        result[int(source)] = CandidateSet(int(source), ranked)
    LOGGER.info("Built {0} candidate sets of size {1}".format(len(result), k))
    return result


class UncertainSet(object):
    """Source entities whose Top-1/Top-2 gap is below ``threshold_used``."""

    def __init__(self, members, threshold_used):
        self.members = frozenset(members)
        self.threshold_used = threshold_used

    def __contains__(self, e):
        return e in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))


def build_uncertain(candidate_map, delta1):
    """Collects the sources with ``s1 - s2 < delta1``.

    :raises ConfigError: if ``delta1`` is negative.
    :raises RetrievalError: if a set has a single candidate."""
    if delta1 < 0:
        raise ConfigError("debate.delta1", "must not be negative")
    members = [e for e, cs in candidate_map.items() if gap(cs) < delta1]
    LOGGER.info("{0} of {1} sources are uncertain at delta1={2}".format(
        len(members), len(candidate_map), delta1))
    return UncertainSet(members, delta1)


def direct_decisions(candidate_map, uncertain):
    """Returns a Direct decision for the Top-1 of every source not in
    ``uncertain``, in ascending source order."""
    return [AlignmentDecision(e, cs.top1, cs.s1, DIRECT)
            for e, cs in sorted(candidate_map.items()) if e not in uncertain]


def write_candidates(candidate_map, path):
    """Writes one ``{"source", "candidates", "gap"}`` JSON object per source,
    in ascending source order."""
    with open(path, "w", encoding="utf-8") as f:
        for e, cs in sorted(candidate_map.items()):
            f.write(json.dumps({
                "source": e,
                "candidates": [[t, s] for t, s in cs.candidates],
                "gap": gap(cs) if len(cs) > 1 else None
            }) + "\n")


def read_candidates(path):
    """Reads a file written by :py:func:`write_candidates`.

    :raises RetrievalError: for malformed lines."""
    result = {}
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                cs = CandidateSet(int(record["source"]),
                                  [(t, s) for t, s in record["candidates"]])
            except (ValueError, KeyError, TypeError) as ex:
                raise RetrievalError("{0}:{1}: malformed candidate record "
                                     "({2})".format(path, number, ex))
            result[cs.source] = cs
    return result
