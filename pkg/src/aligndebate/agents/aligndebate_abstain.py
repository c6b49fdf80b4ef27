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
"""Abstains on every candidate. With this backend a run reproduces the
embedding-only ranking."""

from aligndebate.agents import IAgentBackend, RawAgentOutput, Usage, JUDGE


class AbstainBackend(IAgentBackend):
    """Backend returning empty verdicts."""

    def __init__(self):
        super().__init__("abstain", "Abstain")

    def get_help(self):
        return __doc__

    def complete(self, prompt):
        return RawAgentOutput("{}" if prompt.role == JUDGE else "[]",
                              Usage.ZERO)


def create():
    return AbstainBackend()
