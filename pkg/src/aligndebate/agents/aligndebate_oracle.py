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
"""Answers from the ground truth of the test pairs. The true target scores
1.0 and every other candidate 0.0; the attack role penalizes every other
candidate by 0.5 and the judge endorses the true target whenever it is among
the candidates. Entities without a known counterpart are abstained on. Use it
to check the pipeline, never to measure it."""

from aligndebate.agents import (IAgentBackend, RawAgentOutput, Usage,
                                LDV_ROLES, ATTACK, JUDGE)
import aligndebate.utils as utils
import json

WRONG_TARGET_PENALTY = 0.5


class OracleBackend(IAgentBackend):
    """Backend answering with the ground truth."""

    def __init__(self):
        super().__init__("oracle", "Oracle")

    def get_help(self):
        return __doc__

    def answer(self, prompt):
        """Returns the JSON value the oracle gives for ``prompt``."""
        truth = self.ground_truth.get(prompt.source)
        if prompt.role == JUDGE:
            if truth is None or truth not in prompt.candidate_ids:
                return {"endorse": None, "adjustments": [], "verdict": False}
            return {"endorse": str(truth), "adjustments": [], "verdict": True}
        if truth is None:
            return []
        answers = []
        for c in prompt.candidate_ids:
            right = c == truth
            if prompt.role in LDV_ROLES:
                answers.append({"candidate_id": str(c),
                                "align_score": 1.0 if right else 0.0})
            elif prompt.role == ATTACK:
                answers.append({
                    "candidate_id": str(c),
                    "issues": [] if right else ["not the true target"],
                    "evidence": "" if right else "ground truth differs",
                    "penalty": 0.0 if right else WRONG_TARGET_PENALTY})
            else:
                answers.append({"candidate_id": str(c),
                                "score": 1.0 if right else 0.0,
                                "align": right,
                                "evidence": "oracle " + ("match" if right
                                                         else "mismatch")})
        return answers

    def complete(self, prompt):
        text = json.dumps(self.answer(prompt), sort_keys=True)
        return RawAgentOutput(text, Usage(utils.estimate_tokens(prompt.text),
                                          utils.estimate_tokens(text)))


def create():
    return OracleBackend()
