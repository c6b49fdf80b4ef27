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
"""Role prompt templates.

Every role has a system text, stored verbatim as a text asset in
``aligndebate/resources/prompts`` and pinned by a sha256 checksum, and a user
template built here. Both may hold ``<PLACEHOLDER>`` markers which
:py:func:`render_prompt` fills from a context dictionary."""

from aligndebate.agents import (PROPONENT, OPPONENT, REFEREE, ALIAS, TYPE,
                                ATTRIBUTE, NEIGHBORHOOD, ATTACK, JUDGE, ROLES)
from aligndebate.exception import RenderError, PromptChecksumError
import aligndebate.utils as utils
from collections import namedtuple
import functools
import hashlib
import json
import logging
import os
import re

LOGGER = logging.getLogger(__name__)

PROMPT_DIR = os.path.join(os.path.dirname(__file__), "../resources/prompts")

PROMPT_CHECKSUMS = {
    ALIAS: "06defb340aed4dd3e9f6e22ab26ba25851e9adfd069109c49ef190fe2a71da01",
    ATTACK: "2bd3f98ddbd6e125fd9783b6b98bba5fa97e416277040647660dbd47ce2bb026",
    ATTRIBUTE:
        "76b6e36c74357ef1bca1b84c31b6ce7b593ff1af92002be19698bf8c6b5270b2",
    JUDGE: "335e2c0fb29e40cf6928e127070d3cf53324dddac148a773e1450af18f3aab1a",
    NEIGHBORHOOD:
        "3ec1182bccdc4525efedefdeacd1a84f384201cd043088bf57901ce3e8ebd658",
    OPPONENT:
        "312183649a5becf43b8a64f5ce647abbe73404084a2c85c08e652d809f46e497",
    PROPONENT:
        "49ced10cfb65880bf33561ae11e68ef3230bef976ff179e1e4896fd2aed8bb11",
    REFEREE:
        "175eeddebeb5d1e49aa27561a1ac7218b3a345520db44b7bea4372834561ac6c",
    TYPE: "ecbb2b029b3f897fc2544389944012cea90a94da4563b77aeed740edb6fe43da",
}
"""sha256 of each role's system text asset, as shipped."""

PLACEHOLDER = re.compile(r"<[A-Z][A-Z0-9_]*>")

CANDIDATE_ID_LIST = "<CANDIDATE_ID_LIST>"
SOURCE_PROFILE = "<SOURCE_PROFILE>"
CANDIDATE_PROFILES = "<CANDIDATE_PROFILES>"
SIMILARITY_PRIORS = "<SIMILARITY_PRIORS>"
PROPONENT_OUTPUT = "<PROPONENT_OUTPUT>"
OPPONENT_OUTPUT = "<OPPONENT_OUTPUT>"
AGENT_OUTPUTS = "<AGENT_OUTPUTS>"
PRIOR_ROUNDS = "<PRIOR_ROUNDS>"

PLACEHOLDER_FIELDS = {
    SOURCE_PROFILE: "source",
    CANDIDATE_PROFILES: "candidates",
    SIMILARITY_PRIORS: "similarity_priors",
    PROPONENT_OUTPUT: "proponent_output",
    OPPONENT_OUTPUT: "opponent_output",
    AGENT_OUTPUTS: "agent_outputs",
    PRIOR_ROUNDS: "prior_rounds",
}
"""Context field read for each placeholder. The candidate id list is derived
from the ``candidates`` field."""

EMPTY = "(none)"

_HEAD = "Source entity:\n<SOURCE_PROFILE>\n\nCandidates:\n<CANDIDATE_PROFILES>"

USER_TEMPLATES = {
    PROPONENT: _HEAD + "\n\nEmbedding similarity:\n<SIMILARITY_PRIORS>",
    OPPONENT: _HEAD + "\n\nEmbedding similarity:\n<SIMILARITY_PRIORS>",
    REFEREE: (_HEAD + "\n\nEmbedding similarity:\n<SIMILARITY_PRIORS>"
              "\n\nProponent output:\n<PROPONENT_OUTPUT>"
              "\n\nOpponent output:\n<OPPONENT_OUTPUT>"),
    ALIAS: _HEAD + "\n\nPrevious rounds:\n<PRIOR_ROUNDS>",
    TYPE: _HEAD + "\n\nPrevious rounds:\n<PRIOR_ROUNDS>",
    ATTRIBUTE: _HEAD + "\n\nPrevious rounds:\n<PRIOR_ROUNDS>",
    NEIGHBORHOOD: _HEAD + "\n\nPrevious rounds:\n<PRIOR_ROUNDS>",
    ATTACK: (_HEAD + "\n\nExpert outputs:\n<AGENT_OUTPUTS>"
             "\n\nPrevious rounds:\n<PRIOR_ROUNDS>"),
    JUDGE: (_HEAD + "\n\nEmbedding similarity:\n<SIMILARITY_PRIORS>"
            "\n\nExpert outputs:\n<AGENT_OUTPUTS>"
            "\n\nPrevious rounds:\n<PRIOR_ROUNDS>"),
}

REQUIRED_FIELDS = {
    PROPONENT: ("source", "candidates", "similarity_priors"),
    OPPONENT: ("source", "candidates", "similarity_priors"),
    REFEREE: ("source", "candidates", "similarity_priors",
              "proponent_output", "opponent_output"),
    JUDGE: ("source", "candidates", "similarity_priors", "agent_outputs"),
}
"""Context fields each role needs. Specialists need only ``source`` and
``candidates``; ``prior_rounds`` renders as "(none)" when absent. The attack
role answers independently in round 1, so it needs ``agent_outputs`` and
``prior_rounds`` only from round 2 on."""

ROLE_SECTIONS = {
    ALIAS: ("name", ),
    ATTRIBUTE: ("name", "attributes"),
    NEIGHBORHOOD: ("name", "relations"),
}
"""Profile sections shown to a role. Roles not listed see every section."""


class Prompt(namedtuple("Prompt", ["role", "system", "user", "source",
                                   "candidate_ids"])):
    """A rendered prompt. ``system`` and ``user`` become the two chat
    messages of an http call."""

    @property
    def text(self):
        """The whole prompt as one string."""
        return self.system + "\n\n" + self.user

    @property
    def sha256(self):
        return utils.sha256_text(self.text)


@functools.lru_cache(maxsize=None)
def system_text(role):
    """Reads the system text asset of ``role``.

    :raises RenderError: if the role is unknown.
    :raises PromptChecksumError: if the asset was altered.
    :returns: the text, ending with a newline stripped."""
    if role not in ROLES:
        raise RenderError(role, "role", "unknown role")
    path = os.path.join(PROMPT_DIR, role + ".txt")
    with open(path, "rb") as f:
        data = f.read()
    digest = hashlib.sha256(data).hexdigest()
    if digest != PROMPT_CHECKSUMS[role]:
        LOGGER.error("Prompt asset {0} has checksum {1}".format(path, digest))
        raise PromptChecksumError(
            "Prompt asset {0} does not match its pinned checksum".format(path))
    return data.decode("utf-8").rstrip("\n")


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _render_field(field, value, sections):
    if field == "source":
        return value.render("Source", sections)
    elif field == "candidates":
        return "\n".join(c.render("Candidate {0}".format(c.entity), sections)
                         for c in sorted(value, key=lambda c: c.entity))
    elif field == "similarity_priors":
        if not value:
            return EMPTY
        return "\n".join("Candidate {0}: {1:.4f}".format(t, value[t])
                         for t in sorted(value))
    elif field in ("proponent_output", "opponent_output"):
        return value.strip() or EMPTY
    else:
        if not value:
            return EMPTY
        return _dumps(value)


def render_prompt(role, context, templates=None):
    """Renders the prompt of ``role``.

    ``context`` holds:

    * ``source``: the source profile, anything with ``entity`` and
      ``render(label, sections)``, such as a
      :py:class:`~aligndebate.pipeline.kg_store.Profile`.
    * ``candidates``: the candidate profiles.
    * ``similarity_priors``: a dictionary of candidate id to prior score.
    * ``proponent_output`` and ``opponent_output``: raw referee inputs.
    * ``agent_outputs``: JSON ready verdicts of the specialists. The judge
      sees the current round, the attacker the previous one.
    * ``prior_rounds``: JSON ready outputs of earlier rounds.
    * ``round``: the round number, 1 when absent.

    :param role: one of :py:data:`~aligndebate.agents.ROLES`.
    :param context: the context dictionary.
    :param templates: an optional replacement for :py:data:`USER_TEMPLATES`.
    :raises RenderError: if a needed field is missing or a template holds an
                         unknown placeholder.
    :returns: a :py:class:`Prompt`."""
    system = system_text(role)
    user = (templates or USER_TEMPLATES)[role]
    for marker in PLACEHOLDER.findall(system + "\n" + user):
        if marker != CANDIDATE_ID_LIST and marker not in PLACEHOLDER_FIELDS:
            raise RenderError(role, marker,
                              "unknown placeholder {0}".format(marker))
    required = REQUIRED_FIELDS.get(role, ("source", "candidates"))
    for field in required:
        if context.get(field) is None:
            raise RenderError(role, field)
    if role == ATTACK and context.get("round", 1) >= 2:
        for field in ("agent_outputs", "prior_rounds"):
            if not context.get(field):
                raise RenderError(role, field)
    if not context["candidates"]:
        raise RenderError(role, "candidates", "no candidates to judge")

    sections = ROLE_SECTIONS.get(role, ("name", "attributes", "relations"))
    candidate_ids = sorted(c.entity for c in context["candidates"])
    replacements = {CANDIDATE_ID_LIST: ", ".join(str(i)
                                                 for i in candidate_ids)}
    for marker, field in PLACEHOLDER_FIELDS.items():
        if marker in user:
            value = context.get(field)
            replacements[marker] = (EMPTY if value is None else
                                    _render_field(field, value,
                                                  sections))
    system = utils.multireplace(system, replacements)
    user = utils.multireplace(user, replacements)
    return Prompt(role, system, user, context["source"].entity,
                  tuple(candidate_ids))
