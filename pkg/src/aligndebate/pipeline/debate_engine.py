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
"""The debate stage. Uncertain entities first go through lightweight
verification, where a proponent, an opponent and a referee rerank the
candidates in a single round. Entities the referee cannot settle are
forwarded to the deep debate, where four specialists, an attacker and a
judge argue over a growing candidate subset for up to ``max_rounds`` rounds.
"""

from aligndebate.agents import (PROPONENT, OPPONENT, REFEREE, ATTACK, JUDGE,
                                SPECIALIST_ROLES, ROLES, Usage, call_agent)
from aligndebate.agents.prompts import render_prompt
from aligndebate.agents.verdicts import (parse_verdicts, abstain_all,
                                         verdict_to_json, Align)
from aligndebate.exception import (BackendError, ConfigError,
                                   VerdictParseError, RetrievalError)
from aligndebate.pipeline.kg_store import Profile
from aligndebate.pipeline.retrieval import (CandidateSet, AlignmentDecision,
                                            LDV_RERANK, LDV, DIRECT, gap,
                                            dda_provenance)
import aligndebate.utils as utils
from collections import namedtuple, defaultdict
from concurrent.futures import ThreadPoolExecutor
import logging
import math
import threading

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = 1

DDA = "dda"
DEGRADED = "degraded"
"""Provenance of a debate decision taken after a backend failure."""

ALL_FAILED = "all agents failed"


class DebateConfig(object):
    """Thresholds and weights of the debate stage.

    :param delta1: the score gap above which a judged round may stop early.
    :param delta2: the top score below which the ladder may expand.
    :param max_rounds: the maximum number of deep debate rounds.
    :param ladder: the candidate subset sizes, strictly increasing.
    :param w_sim: weight of the similarity prior in aggregate scores.
    :param w_agents: weight of the mean specialist score.
    :param compression_budget: fraction of profile tokens kept, in (0, 1].
    :param compression_floor: the smallest token budget of a profile.
    :param ldv_confidence_floor: referee scores below this forward an entity.
    :param judge_delta_cap: bound on the size of one judge adjustment.
    :param max_retries: calls repeated after an unparseable answer.
    :param workers: entities debated at the same time.
    :raises ConfigError: if a value is out of range."""

    def __init__(self, delta1=0.05, delta2=0.5, max_rounds=3,
                 ladder=(5, 10, 15, 20), w_sim=0.3, w_agents=0.7,
                 compression_budget=0.15, compression_floor=32,
                 ldv_confidence_floor=0.6, judge_delta_cap=0.2,
                 max_retries=2, workers=4, enable_ldv=True, enable_dda=True):
        ladder = [int(k) for k in ladder]
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("debate.ladder",
                              "must be non-empty and strictly increasing")
        if ladder[0] < 2:
            raise ConfigError("debate.ladder",
                              "first rung must be at least 2")
        if not 0 < compression_budget <= 1:
            raise ConfigError("debate.compression_budget",
                              "must lie in (0, 1]")
        if max_rounds < 1:
            raise ConfigError("debate.max_rounds", "must be at least 1")
        if delta1 < 0:
            raise ConfigError("debate.delta1", "must not be negative")
        self.delta1 = delta1
        self.delta2 = delta2
        self.max_rounds = max_rounds
        self.ladder = ladder
        self.w_sim = w_sim
        self.w_agents = w_agents
        self.compression_budget = compression_budget
        self.compression_floor = compression_floor
        self.ldv_confidence_floor = ldv_confidence_floor
        self.judge_delta_cap = judge_delta_cap
        self.max_retries = max_retries
        self.workers = workers
        self.enable_ldv = enable_ldv
        self.enable_dda = enable_dda

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg["debate.delta1"], cfg["debate.delta2"],
                   cfg["debate.max_rounds"], cfg["debate.ladder"],
                   cfg["debate.w_sim"], cfg["debate.w_agents"],
                   cfg["debate.compression_budget"],
                   cfg["debate.compression_floor"],
                   cfg["debate.ldv_confidence_floor"],
                   cfg["debate.judge_delta_cap"], cfg["agents.max_retries"],
                   cfg["debate.workers"], cfg["debate.enable_ldv"],
                   cfg["debate.enable_dda"])


class CompressedProfile(namedtuple("CompressedProfile", [
        "entity", "name", "kept_attributes", "kept_relations",
        "token_estimate", "original_token_estimate"])):
    """A profile cut down to a token budget."""

    @property
    def ratio(self):
        if self.original_token_estimate == 0:
            return 1.0
        return self.token_estimate / self.original_token_estimate

    def render(self, label, sections=Profile.SECTIONS):
        return Profile(self.entity, self.name, self.kept_attributes,
                       self.kept_relations).render(label, sections)


def _words(text):
    return len(text.split())


def compress_profile(profile, corpus_stats, cfg):
    """Keeps the most frequent attributes and relations of ``profile`` that
    fit in ``compression_budget`` of its token estimate, or in
    ``compression_floor`` tokens if that is larger. The name is always kept.
    Items are considered in descending corpus frequency, ties by kind then
    text, and the first item that does not fit ends the selection.

    :param profile: a :py:class:`~aligndebate.pipeline.kg_store.Profile`.
    :param corpus_stats: a frequency table from
                         :py:func:`~.kg_store.frequency_table`.
    :param cfg: a :py:class:`DebateConfig`.
    :returns: a :py:class:`CompressedProfile`."""
    items = []
    for key, value in profile.attributes:
        items.append((("attribute", key), (key, value),
                      _words("{0}: {1}".format(key, value))))
    for relation, neighbor in profile.relations:
        items.append((("relation", relation), (relation, neighbor),
                      _words("{0}|{1}".format(relation, neighbor))))
    name_words = _words(profile.name)
    original = utils.words_to_tokens(name_words + sum(i[2] for i in items))
    budget = max(cfg.compression_floor,
                 int(math.floor(cfg.compression_budget * original)))
    if original <= budget:
        return CompressedProfile(profile.entity, profile.name,
                                 tuple(profile.attributes),
                                 tuple(profile.relations), original, original)

    items.sort(key=lambda i: (-corpus_stats.get(i[0], 0), i[0][0], i[1]))
    words = name_words
    kept = set()
    for stat_key, item, item_words in items:
        if utils.words_to_tokens(words + item_words) > budget:
            break
        words += item_words
        kept.add((stat_key[0], item))
    return CompressedProfile(
        profile.entity, profile.name,
        tuple(a for a in profile.attributes if ("attribute", a) in kept),
        tuple(r for r in profile.relations if ("relation", r) in kept),
        utils.words_to_tokens(words), original)


class ProfileBook(object):
    """Compressed profiles of both graphs, built on first use.

    :param g_s: the source graph.
    :param g_t: the target graph.
    :param corpus_stats: the frequency table used for compression.
    :param cfg: a :py:class:`DebateConfig`."""

    def __init__(self, g_s, g_t, corpus_stats, cfg):
        self.g_s = g_s
        self.g_t = g_t
        self.corpus_stats = corpus_stats
        self.cfg = cfg
        self._cache = {}
        self._lock = threading.Lock()

    def _get(self, graph, e):
        key = (graph.side, e)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        compressed = compress_profile(graph.entity_profile(e),
                                      self.corpus_stats, self.cfg)
        with self._lock:
            self._cache[key] = compressed
        return compressed

    def source(self, e):
        return self._get(self.g_s, e)

    def target(self, t):
        return self._get(self.g_t, t)


AgentCall = namedtuple("AgentCall", ["role", "prompt_sha256", "response",
                                     "verdicts", "attempts", "parsed",
                                     "usage"])
"""One agent's turn. ``parsed`` is False when every attempt was unreadable
and the verdicts are the all-Abstain substitute."""


def agents_for(backend):
    """Returns a role to backend dictionary using ``backend`` for every
    role."""
    return {role: backend for role in ROLES}


def ask(agents, role, context, expected_ids, cfg):
    """Renders the prompt of ``role``, calls its backend and parses the
    answer. Unreadable answers are asked again ``cfg.max_retries`` times,
    then replaced by abstentions.

    :raises BackendError: if the backend fails.
    :returns: an :py:class:`AgentCall`."""
    prompt = render_prompt(role, context)
    usage = Usage.ZERO
    output = None
    for attempt in range(1, cfg.max_retries + 2):
        output = call_agent(agents[role], prompt)
        usage = usage + output.usage
        try:
            result = parse_verdicts(output.text, expected_ids, role)
        except VerdictParseError as ex:
            LOGGER.warning("Entity {0}: {1} (attempt {2})".format(
                prompt.source, ex, attempt))
            continue
        return AgentCall(role, prompt.sha256, output.text, result.verdicts,
                         attempt, True, usage)
    LOGGER.warning("Entity {0}: {1} answers unreadable, abstaining".format(
        prompt.source, role))
    return AgentCall(role, prompt.sha256, output.text,
                     abstain_all(role, expected_ids), cfg.max_retries + 1,
                     False, usage)


def call_to_json(call):
    if isinstance(call.verdicts, list):
        verdicts = [verdict_to_json(v) for v in call.verdicts]
    else:
        verdicts = verdict_to_json(call.verdicts)
    return {"role": call.role, "prompt_sha256": call.prompt_sha256,
            "response": call.response, "verdicts": verdicts,
            "attempts": call.attempts, "parsed": call.parsed,
            "usage": usage_to_json(call.usage)}


def usage_to_json(usage):
    return {"prompt_tokens": usage.prompt_tokens,
            "completion_tokens": usage.completion_tokens,
            "total_tokens": usage.total}


def _sum_usage(calls):
    total = Usage.ZERO
    for call in calls:
        total = total + call.usage
    return total


def rank(scores, prior, endorse=None):
    """Orders candidate ids by descending score, then endorsement, then
    descending prior, then ascending id."""
    return sorted(scores, key=lambda c: (-scores[c], c != endorse,
                                         -prior.get(c, 0.0), c))


def _scores_by_candidate(verdicts):
    scores = {}
    for verdict in verdicts:
        if verdict.align is not Align.ABSTAIN and verdict.score is not None:
            scores[verdict.candidate] = verdict.score
    return scores


def _top(verdicts, prior):
    scores = _scores_by_candidate(verdicts)
    if not scores:
        return None
    return rank(scores, prior)[0]


# Verification

LdvRecord = namedtuple("LdvRecord", ["candidates", "forwarded", "reasons",
                                     "referee_score", "calls", "usage"])
"""The outcome of lightweight verification. ``candidates`` is the reranked
set, or the original one when the referee gave nothing to rank by."""


def _ldv_context(e, cs, profiles):
    return {"source": profiles.source(e),
            "candidates": [profiles.target(t) for t in cs.targets()],
            "similarity_priors": {t: cs.prior.get(t, s)
                                  for t, s in cs.candidates}}


def run_ldv(e, cs, agents, cfg, profiles):
    """Runs lightweight verification of ``e``. The proponent and opponent
    answer independently, then the referee weighs both. The referee's
    scores rerank ``cs``, ties broken by the prior score; candidates the
    referee skipped go last.

    The entity is forwarded when the referee's Top-1 differs from the
    embedding Top-1, when the proponent's Top-1 differs from the referee's
    or the opponent's, or when the referee's top score is below
    ``cfg.ldv_confidence_floor``. If all three agents fail the entity is
    forwarded with its original ordering.

    :param e: the source entity.
    :param cs: its :py:class:`~aligndebate.pipeline.retrieval.CandidateSet`.
    :param agents: a role to backend dictionary.
    :param cfg: a :py:class:`DebateConfig`.
    :param profiles: a :py:class:`ProfileBook`.
    :returns: an :py:class:`LdvRecord`."""
    context = _ldv_context(e, cs, profiles)
    expected = cs.targets()
    calls = {}
    failures = []
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = {role: pool.submit(ask, agents, role, context, expected,
                                     cfg)
                   for role in (PROPONENT, OPPONENT)}
        for role in (PROPONENT, OPPONENT):
            try:
                calls[role] = futures[role].result()
            except BackendError as ex:
                LOGGER.warning("Entity {0}: {1} failed: {2}".format(
                    e, role, ex))
                failures.append(role)
    referee_context = dict(context)
    for role, field in ((PROPONENT, "proponent_output"),
                        (OPPONENT, "opponent_output")):
        referee_context[field] = calls[role].response if role in calls \
            else ""
    try:
        calls[REFEREE] = ask(agents, REFEREE, referee_context, expected, cfg)
    except BackendError as ex:
        LOGGER.warning("Entity {0}: referee failed: {1}".format(e, ex))
        failures.append(REFEREE)

    ordered_calls = [calls[r] for r in (PROPONENT, OPPONENT, REFEREE)
                     if r in calls]
    usage = _sum_usage(ordered_calls)
    if len(failures) == 3:
        LOGGER.warning("Entity {0}: every verification agent failed, "
                       "forwarding unchanged".format(e))
        return LdvRecord(cs, True, (ALL_FAILED, ), None,
                         ordered_calls, usage)

    referee = _scores_by_candidate(calls[REFEREE].verdicts) \
        if REFEREE in calls else {}
    reranked = cs
    if referee:
        order = sorted(expected, key=lambda t: (
            -referee.get(t, -1.0), -cs.prior.get(t, 0.0), t))
        reranked = CandidateSet(e, [(t, referee.get(t, 0.0)) for t in order],
                                LDV_RERANK, cs.prior)

    reasons = []
    referee_top = reranked.top1 if referee else None
    referee_score = referee[referee_top] if referee else None
    proponent_top = _top(calls[PROPONENT].verdicts, cs.prior) \
        if PROPONENT in calls else None
    opponent_top = _top(calls[OPPONENT].verdicts, cs.prior) \
        if OPPONENT in calls else None
    if referee_top is None:
        reasons.append("referee gave no scores")
    elif referee_top != cs.top1:
        reasons.append("referee top-1 differs from embedding top-1")
    if proponent_top is not None and referee_top is not None \
            and proponent_top != referee_top:
        reasons.append("proponent top-1 differs from referee top-1")
    if proponent_top is not None and opponent_top is not None \
            and proponent_top != opponent_top:
        reasons.append("proponent top-1 differs from opponent top-1")
    if referee_score is not None \
            and referee_score < cfg.ldv_confidence_floor:
        reasons.append("referee top score below confidence floor")
    return LdvRecord(reranked, bool(reasons), tuple(reasons), referee_score,
                     ordered_calls, usage)


def ldv_to_json(record):
    return {"forwarded": record.forwarded, "reasons": list(record.reasons),
            "referee_score": record.referee_score,
            "ranking": [[t, s] for t, s in record.candidates.candidates],
            "calls": [call_to_json(c) for c in record.calls],
            "usage": usage_to_json(record.usage)}


# Deep debate

class RoundRecord(namedtuple("RoundRecord", [
        "round", "k", "calls", "scores", "ranking", "v", "v_agree",
        "judge_flag", "expanded", "terminated"])):
    """One deep debate round. ``calls`` holds the :py:class:`AgentCall` of
    every role that spoke, ``scores`` the aggregate score of each candidate
    of the subset and ``ranking`` the subset in decision order."""

    @property
    def s1(self):
        return self.scores[self.ranking[0]]

    def call(self, role):
        for call in self.calls:
            if call.role == role:
                return call
        return None

    def rescored(self, source):
        """The subset as a candidate set holding the aggregate scores."""
        return CandidateSet(source, [(c, self.scores[c])
                                     for c in self.ranking], DDA)


RoundRecord.__new__.__defaults__ = (False, False)


def aggregate_scores(verdicts, attacks, judge, sim_prior, cfg):
    """Combines one round's opinions into a score per candidate::

        total(c) = w_sim * prior(c) + w_agents * mean(scores of c)
                   - penalty(c) + sum(judge deltas of c)

    Abstentions are left out of the mean; a candidate every specialist
    abstained on uses its prior in place of the mean. Judge deltas are
    clamped to ``cfg.judge_delta_cap``. Opinions about candidates missing
    from ``sim_prior`` are rejected and logged.

    :param verdicts: specialist
                     :py:class:`~aligndebate.agents.verdicts.AgentVerdict`
                     objects.
    :param attacks: :py:class:`~aligndebate.agents.verdicts.AttackVerdict`
                    objects.
    :param judge: a :py:class:`~aligndebate.agents.verdicts.JudgeVerdict` or
                  None.
    :param sim_prior: a dictionary of candidate to normalised prior score.
    :param cfg: a :py:class:`DebateConfig`.
    :returns: a dictionary of candidate to total."""
    agent_scores = defaultdict(list)
    for verdict in verdicts:
        if verdict.candidate not in sim_prior:
            LOGGER.warning("Rejected {0} verdict for unknown candidate {1}"
                           .format(verdict.role, verdict.candidate))
            continue
        if verdict.align is not Align.ABSTAIN and verdict.score is not None:
            agent_scores[verdict.candidate].append(verdict.score)
    penalties = defaultdict(float)
    for attack in attacks:
        if attack.candidate not in sim_prior:
            LOGGER.warning("Rejected attack on unknown candidate {0}"
                           .format(attack.candidate))
            continue
        penalties[attack.candidate] += attack.penalty
    deltas = defaultdict(list)
    cap = cfg.judge_delta_cap
    for adjustment in (judge.adjustments if judge is not None else ()):
        if adjustment.candidate not in sim_prior:
            LOGGER.warning("Rejected judge adjustment of unknown candidate "
                           "{0}".format(adjustment.candidate))
            continue
        deltas[adjustment.candidate].append(
            min(cap, max(-cap, adjustment.delta)))

    totals = {}
    for c in sorted(sim_prior):
        prior = sim_prior[c]
        scores = sorted(agent_scores.get(c, ()))
        agent = math.fsum(scores) / len(scores) if scores else prior
        totals[c] = math.fsum([cfg.w_sim * prior, cfg.w_agents * agent,
                               -penalties.get(c, 0.0)]
                              + sorted(deltas.get(c, ())))
    return totals


def count_votes(verdicts, candidate):
    """Returns ``(v, v_agree)``: the specialists that did not abstain on
    ``candidate`` and those among them voting to align."""
    votes = [v for v in verdicts
             if v.candidate == candidate and v.align is not Align.ABSTAIN]
    return len(votes), sum(1 for v in votes if v.align is Align.TRUE)


def should_expand(state, cfg):
    """Whether the candidate subset grows to the next ladder rung: the top
    score is below ``delta2``, at most half of the votes agree and the judge
    did not accept. With no votes the vote clause holds. Never true at the
    last rung."""
    if state.k >= cfg.ladder[-1]:
        return False
    votes_weak = state.v == 0 or state.v_agree / state.v <= 0.5
    return state.s1 < cfg.delta2 and votes_weak and not state.judge_flag


def should_terminate(state, cs, cfg):
    """Whether the debate stops after ``state``: the judge accepted and
    either the gap of the rescored ``cs`` exceeds ``delta1`` or more than
    half of the votes agree. The last allowed round always stops. With no
    votes the vote clause fails."""
    votes_strong = state.v > 0 and state.v_agree / state.v > 0.5
    early = (gap(cs) > cfg.delta1 or votes_strong) and state.judge_flag
    return early or state.round >= cfg.max_rounds


def _round_summary(record):
    return {"round": record.round,
            "candidates": sorted(record.ranking),
            "outputs": {call.role: call_to_json(call)["verdicts"]
                        for call in record.calls},
            "aggregate": [[c, record.scores[c]] for c in record.ranking]}


def _debate_round(e, subset, agents, cfg, profiles, round_index, previous):
    expected = subset.targets()
    prior = {t: subset.prior.get(t, s) for t, s in subset.candidates}
    context = {"source": profiles.source(e),
               "candidates": [profiles.target(t) for t in expected],
               "similarity_priors": prior,
               "round": round_index}
    if previous is not None:
        context["prior_rounds"] = [_round_summary(previous)]

    # the attacker sees the specialists of the previous round only
    attack_context = dict(context)
    if previous is not None:
        attack_context["agent_outputs"] = {
            call.role: call_to_json(call)["verdicts"]
            for call in previous.calls if call.role in SPECIALIST_ROLES}

    with ThreadPoolExecutor(max_workers=len(SPECIALIST_ROLES) + 1) as pool:
        futures = [pool.submit(ask, agents, role, context, expected, cfg)
                   for role in SPECIALIST_ROLES]
        attack_future = pool.submit(ask, agents, ATTACK, attack_context,
                                    expected, cfg)
        specialists = [f.result() for f in futures]
        attack = attack_future.result()
    outputs = {call.role: call_to_json(call)["verdicts"]
               for call in specialists}
    outputs[ATTACK] = call_to_json(attack)["verdicts"]
    judge = ask(agents, JUDGE, dict(context, agent_outputs=outputs),
                expected, cfg)

    verdicts = [v for call in specialists for v in call.verdicts]
    scores = aggregate_scores(verdicts, attack.verdicts, judge.verdicts,
                              prior, cfg)
    endorse = judge.verdicts.endorse
    ranking = rank(scores, prior, endorse)
    v, v_agree = count_votes(verdicts, ranking[0])
    flag = judge.verdicts.verdict
    if flag is None:
        flag = endorse is not None and endorse == ranking[0]
    return RoundRecord(round_index, len(expected),
                       tuple(specialists + [attack, judge]), scores,
                       tuple(ranking), v, v_agree, flag)


DebateTranscript = namedtuple("DebateTranscript", [
    "source", "ldv", "rounds", "decision", "ranking", "degraded", "usage"])
"""The full record of one entity's debate. ``ranking`` is the final order of
every candidate, decided target first."""


def _full_ranking(head, cs):
    seen = set(head)
    return list(head) + [t for t in cs.targets() if t not in seen]


def run_dda(e, cs, agents, cfg, profiles, ldv=None):
    """Runs the deep debate of ``e`` over the ladder of subsets of ``cs``.

    Each round the specialists score the subset, the attacker penalizes it
    and the judge adjusts and endorses. A round that meets
    :py:func:`should_terminate` ends the debate, otherwise
    :py:func:`should_expand` may move to the next ladder rung. The decision
    is the round's best aggregate score, judge endorsement breaking ties. A
    backend failure ends the debate with the last aggregate ranking, or the
    prior ordering if no round finished, and marks it degraded.

    :param ldv: the :py:class:`LdvRecord` that forwarded ``e``, if any.
    :raises RetrievalError: if ``cs`` is shorter than the last rung.
    :returns: a :py:class:`DebateTranscript`."""
    if len(cs) < cfg.ladder[-1]:
        raise RetrievalError("Entity {0} has {1} candidates, the ladder "
                             "needs {2}".format(e, len(cs), cfg.ladder[-1]))
    rung = 0
    rounds = []
    degraded = False
    previous = None
    for round_index in range(1, cfg.max_rounds + 1):
        subset = cs.head(cfg.ladder[rung])
        try:
            record = _debate_round(e, subset, agents, cfg, profiles,
                                   round_index, previous)
        except BackendError as ex:
            LOGGER.error("Entity {0}: debate degraded in round {1}: {2}"
                         .format(e, round_index, ex))
            degraded = True
            break
        if should_terminate(record, record.rescored(e), cfg):
            record = record._replace(terminated=True)
        elif should_expand(record, cfg):
            record = record._replace(expanded=True)
            rung += 1
        rounds.append(record)
        previous = record
        if record.terminated:
            break

    usage = _sum_usage(ldv.calls if ldv is not None else ())
    for record in rounds:
        usage = usage + _sum_usage(record.calls)
    if rounds:
        last = rounds[-1]
        target = last.ranking[0]
        score = last.scores[target]
        provenance = DEGRADED if degraded else dda_provenance(last.round)
        ranking = _full_ranking(last.ranking, cs)
    else:
        order = sorted(cs.targets(), key=lambda t: (-cs.prior.get(t, 0.0),
                                                    t))
        target = order[0]
        score = cs.prior.get(target, 0.0)
        provenance = DEGRADED
        ranking = order
    decision = AlignmentDecision(e, target, score, provenance)
    return DebateTranscript(e, ldv, tuple(rounds), decision, ranking,
                            degraded, usage)


def round_to_json(record):
    return {"round": record.round, "k": record.k,
            "calls": [call_to_json(c) for c in record.calls],
            "aggregate": [[c, record.scores[c]] for c in record.ranking],
            "v": record.v, "v_agree": record.v_agree,
            "judge_flag": record.judge_flag, "expanded": record.expanded,
            "terminated": record.terminated}


def transcript_to_json(transcript):
    """Returns a JSON ready dictionary of a :py:class:`DebateTranscript`."""
    decision = transcript.decision
    return {
        "schema_version": SCHEMA_VERSION,
        "source": transcript.source,
        "ldv": (ldv_to_json(transcript.ldv)
                if transcript.ldv is not None else None),
        "rounds": [round_to_json(r) for r in transcript.rounds],
        "decision": {"target": decision.target, "score": decision.score,
                     "provenance": decision.provenance},
        "ranking": list(transcript.ranking),
        "degraded": transcript.degraded,
        "usage": usage_to_json(transcript.usage),
    }


def debate_entity(e, cs, agents, cfg, profiles):
    """Debates one uncertain entity with the stages ``cfg`` enables. Only
    the first ``cfg.ladder[-1]`` candidates of ``cs`` take part.

    :returns: a :py:class:`DebateTranscript`."""
    cs = cs.head(cfg.ladder[-1])
    ldv = None
    if cfg.enable_ldv:
        ldv = run_ldv(e, cs, agents, cfg, profiles)
        if not ldv.forwarded or not cfg.enable_dda:
            failed = ALL_FAILED in ldv.reasons
            if failed:
                LOGGER.warning("Entity {0}: degraded to the similarity "
                               "order".format(e))
            top = ldv.candidates.top1
            decision = AlignmentDecision(e, top, ldv.candidates.s1,
                                         DEGRADED if failed else LDV)
            return DebateTranscript(e, ldv, (), decision,
                                    ldv.candidates.targets(), failed,
                                    ldv.usage)
        cs = ldv.candidates
    if cfg.enable_dda:
        return run_dda(e, cs, agents, cfg, profiles, ldv)
    decision = AlignmentDecision(e, cs.top1, cs.s1, DIRECT)
    return DebateTranscript(e, None, (), decision, cs.targets(), False,
                            Usage.ZERO)


def debate_all(entities, candidate_map, agents, cfg, profiles,
               progress=None):
    """Debates ``entities`` concurrently on ``cfg.workers`` threads.

    :param progress: an optional callable receiving the fraction done.
    :returns: the transcripts, sorted by source id."""
    entities = sorted(entities)
    if not entities:
        return []
    transcripts = {}
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = {pool.submit(debate_entity, e, candidate_map[e], agents,
                               cfg, profiles): e for e in entities}
        for done, future in enumerate(futures, 1):
            transcripts[futures[future]] = future.result()
            if progress is not None:
                progress(done / len(entities))
    return [transcripts[e] for e in entities]
