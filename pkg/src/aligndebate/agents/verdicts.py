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
"""Reads agent answers into verdicts.

Agents are asked for bare JSON but often wrap it in prose or code fences,
forget candidates or step outside the score range. :py:func:`parse_verdicts`
strips the wrapping, makes one bracket balancing repair and fills or clamps
what is missing, recording a warning for every change."""

from aligndebate.agents import (LDV_ROLES, SPECIALIST_ROLES, ATTACK, JUDGE,
                                ROLES)
from aligndebate.exception import VerdictParseError
from collections import namedtuple
import enum
import json
import logging
import math
import re

LOGGER = logging.getLogger(__name__)

EVIDENCE_LIMIT = 20
ATTACK_EVIDENCE_LIMIT = 50
NOTE_LIMIT = 40

MAX_STARTS = 64
"""Opening brackets tried before falling back to the repair pass."""

FENCE = re.compile(r"```[A-Za-z]*[ \t]*\n?(.*?)```", re.DOTALL)


class Align(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    ABSTAIN = "abstain"


AgentVerdict = namedtuple("AgentVerdict",
                          ["role", "candidate", "score", "align", "evidence"])
"""The opinion of one scoring agent on one candidate. ``score`` is None for
an abstention."""

AttackVerdict = namedtuple("AttackVerdict",
                           ["candidate", "issues", "penalty", "evidence"])

Adjustment = namedtuple("Adjustment", ["candidate", "delta", "note"])

JudgeVerdict = namedtuple("JudgeVerdict",
                          ["endorse", "adjustments", "verdict"])
"""The judge's answer. ``endorse`` is None when the judge named no valid
candidate and ``verdict`` is None when the optional flag was left out."""

ParseResult = namedtuple("ParseResult", ["verdicts", "warnings"])
"""``verdicts`` is a list sorted by candidate for the scoring and attack
roles, and a :py:class:`JudgeVerdict` for the judge."""


def abstain(role, candidate):
    """Returns the abstention of ``role`` on ``candidate``."""
    return AgentVerdict(role, candidate, None, Align.ABSTAIN, "")


def abstain_all(role, expected_ids):
    """Returns the verdicts used when ``role`` gave no usable answer."""
    ids = sorted(set(expected_ids))
    if role == ATTACK:
        return [AttackVerdict(c, (), 0.0, "") for c in ids]
    if role == JUDGE:
        return JudgeVerdict(None, (), None)
    return [abstain(role, c) for c in ids]


def verdict_to_json(verdict):
    """Returns a JSON ready dictionary of any verdict type."""
    if isinstance(verdict, AgentVerdict):
        return {"candidate_id": verdict.candidate, "score": verdict.score,
                "align": verdict.align.value, "evidence": verdict.evidence}
    elif isinstance(verdict, AttackVerdict):
        return {"candidate_id": verdict.candidate,
                "issues": list(verdict.issues), "penalty": verdict.penalty,
                "evidence": verdict.evidence}
    return {"endorse": verdict.endorse, "verdict": verdict.verdict,
            "adjustments": [{"candidate_id": a.candidate, "delta": a.delta,
                             "note": a.note} for a in verdict.adjustments]}


def _strip_fences(text):
    match = FENCE.search(text)
    if match is not None:
        return match.group(1)
    # an opening fence whose closing fence was cut off
    if "```" in text:
        text = text.split("```", 1)[1]
        text = re.sub(r"^[A-Za-z]*[ \t]*\n", "", text, count=1)
    return text


def _balance(fragment):
    """Closes every string and bracket left open in ``fragment``. Commas
    directly before a closing bracket are dropped on the way."""
    stack = []
    out = []
    in_string = False
    escaped = False
    for char in fragment:
        if in_string:
            out.append(char)
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char in "]}":
            if not stack or stack[-1] != char:
                break
            while out and out[-1] in " \t\r\n,":
                out.pop()
            out.append(stack.pop())
            if not stack:
                return "".join(out)
            continue
        out.append(char)
        if char == '"':
            in_string = True
        elif char in "[{":
            stack.append("]" if char == "[" else "}")
    if in_string:
        if escaped:
            out.pop()
        out.append('"')
    text = "".join(out).rstrip()
    while text and text[-1] in ",:":
        text = text[:-1].rstrip()
    return text + "".join(reversed(stack))


def _extract(text, opener, role):
    decoder = json.JSONDecoder()
    starts = [i for i, c in enumerate(text) if c == opener][:MAX_STARTS]
    for start in starts:
        try:
            value, _ = decoder.raw_decode(text, start)
            return value
        except (ValueError, RecursionError):
            continue
    if not starts:
        raise VerdictParseError(role, "no JSON {0} found".format(
            "array" if opener == "[" else "object"), text)
    repaired = _balance(text[starts[0]:])
    try:
        value, _ = decoder.raw_decode(repaired)
    except (ValueError, RecursionError) as ex:
        raise VerdictParseError(role, "unparseable after repair: {0}"
                                .format(ex), text)
    LOGGER.debug("Repaired unbalanced {0} output".format(role))
    return value


def _candidate_id(value):
    if isinstance(value, bool):
        raise ValueError(value)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(value)
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return int(value.strip())
    raise ValueError(value)


def _number(value):
    """Returns ``value`` as a float, or None for NaN and non numbers."""
    if isinstance(value, bool) or value is None:
        return None
    try:
        number = float(value)
    except (TypeError, ValueError, OverflowError):
        return None
    if math.isnan(number):
        return None
    return number


def _clamp(number, what, warnings):
    if number < 0.0 or number > 1.0:
        clamped = min(1.0, max(0.0, number))
        warnings.append("{0} {1} clamped to {2}".format(what, number,
                                                         clamped))
        return clamped
    return number


def _align(value):
    if isinstance(value, bool):
        return Align.TRUE if value else Align.FALSE
    if isinstance(value, str):
        lowered = value.strip().strip('"').lower()
        for member in Align:
            if lowered == member.value:
                return member
    return None


def _text(value, limit):
    if value is None:
        return ""
    return str(value)[:limit]


def _items(value, role):
    if isinstance(value, dict):
        value = [value]
    if not isinstance(value, list):
        raise VerdictParseError(role, "expected a JSON array", value)
    return value


def _scoring_verdict(role, candidate, item, warnings):
    score_key = "align_score" if role in LDV_ROLES else "score"
    raw = item.get(score_key, item.get("score", item.get("align_score")))
    score = _number(raw)
    align = _align(item.get("align")) if role in SPECIALIST_ROLES else None
    if align is Align.ABSTAIN:
        return abstain(role, candidate)
    if score is None:
        warnings.append("candidate {0} has no usable score".format(
            candidate))
        return abstain(role, candidate)
    score = _clamp(score, "score of candidate {0}".format(candidate),
                   warnings)
    if align is None:
        align = Align.TRUE if score >= 0.5 else Align.FALSE
    return AgentVerdict(role, candidate, score, align,
                        _text(item.get("evidence"), EVIDENCE_LIMIT))


def _attack_verdict(candidate, item, warnings):
    penalty = _number(item.get("penalty"))
    if penalty is None:
        warnings.append("candidate {0} has no usable penalty".format(
            candidate))
        penalty = 0.0
    penalty = _clamp(penalty, "penalty of candidate {0}".format(candidate),
                     warnings)
    issues = item.get("issues") or []
    if not isinstance(issues, list):
        issues = [issues]
    return AttackVerdict(candidate, tuple(str(i) for i in issues), penalty,
                         _text(item.get("evidence"), ATTACK_EVIDENCE_LIMIT))


def _parse_list(role, value, expected, warnings):
    found = {}
    for item in _items(value, role):
        if not isinstance(item, dict):
            warnings.append("ignored non-object entry {0!r}".format(item))
            continue
        try:
            candidate = _candidate_id(item.get("candidate_id"))
        except (TypeError, ValueError, OverflowError):
            warnings.append("ignored entry without a candidate id")
            continue
        if candidate not in expected:
            warnings.append("dropped unknown candidate {0}".format(candidate))
            continue
        if candidate in found:
            warnings.append("ignored repeated candidate {0}".format(
                candidate))
            continue
        if role == ATTACK:
            found[candidate] = _attack_verdict(candidate, item, warnings)
        else:
            found[candidate] = _scoring_verdict(role, candidate, item,
                                                warnings)
    verdicts = []
    for candidate in sorted(expected):
        if candidate in found:
            verdicts.append(found[candidate])
        elif role == ATTACK:
            verdicts.append(AttackVerdict(candidate, (), 0.0, ""))
        else:
            verdicts.append(abstain(role, candidate))
    return verdicts


def _parse_judge(value, expected, warnings):
    if not isinstance(value, dict):
        raise VerdictParseError(JUDGE, "expected a JSON object", value)
    endorse = None
    if value.get("endorse") is not None:
        try:
            endorse = _candidate_id(value.get("endorse"))
        except (TypeError, ValueError, OverflowError):
            endorse = None
        if endorse not in expected:
            warnings.append("endorsement {0!r} is not a candidate".format(
                value.get("endorse")))
            endorse = None
    adjustments = {}
    raw = value.get("adjustments") or []
    if not isinstance(raw, list):
        raw = [raw]
    for item in raw:
        if not isinstance(item, dict):
            continue
        try:
            candidate = _candidate_id(item.get("candidate_id"))
        except (TypeError, ValueError, OverflowError):
            warnings.append("ignored adjustment without a candidate id")
            continue
        delta = _number(item.get("delta"))
        if candidate not in expected or delta is None \
                or math.isinf(delta) or candidate in adjustments:
            warnings.append("dropped adjustment for {0}".format(candidate))
            continue
        adjustments[candidate] = Adjustment(
            candidate, delta, _text(item.get("note"), NOTE_LIMIT))
    verdict = value.get("verdict")
    if not isinstance(verdict, bool):
        parsed = _align(verdict)
        verdict = None if parsed in (None, Align.ABSTAIN) \
            else parsed is Align.TRUE
    return JudgeVerdict(endorse,
                        tuple(adjustments[c] for c in sorted(adjustments)),
                        verdict)


def parse_verdicts(raw, expected_ids, role):
    """Parses the answer of ``role`` about ``expected_ids``.

    Missing candidates become abstentions (for the attack role, a penalty
    of 0), unknown candidates are dropped, scores and penalties are clamped
    to [0, 1] and texts are cut to the lengths the prompts allow.

    :param raw: the agent's answer, str or bytes.
    :param expected_ids: the candidate ids the prompt listed.
    :param role: the role that answered.
    :raises VerdictParseError: if no JSON of the role's shape can be read,
                               even after repair. No other exception is
                               raised.
    :returns: a :py:class:`ParseResult`."""
    if role not in ROLES:
        raise VerdictParseError(role, "unknown role", raw)
    try:
        expected = set(int(c) for c in expected_ids)
    except (TypeError, ValueError):
        raise VerdictParseError(role, "candidate ids must be integers", raw)
    if not expected:
        raise VerdictParseError(role, "no expected candidates", raw)
    if isinstance(raw, (bytes, bytearray)):
        text = bytes(raw).decode("utf-8", errors="replace")
    elif isinstance(raw, str):
        text = raw
    else:
        raise VerdictParseError(role, "output is not text", raw)

    text = _strip_fences(text)
    warnings = []
    try:
        if role == JUDGE:
            verdicts = _parse_judge(_extract(text, "{", role), expected,
                                    warnings)
        else:
            opener = "[" if "[" in text else "{"
            verdicts = _parse_list(role, _extract(text, opener, role),
                                   expected, warnings)
    except VerdictParseError:
        raise
    except (TypeError, ValueError, AttributeError, RecursionError) as ex:
        raise VerdictParseError(role, "malformed verdicts: {0}".format(ex),
                                raw)
    for warning in warnings:
        LOGGER.warning("{0} output: {1}".format(role, warning))
    return ParseResult(verdicts, warnings)
