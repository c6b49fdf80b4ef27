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
"""Replays recorded answers from the JSON lines file at ``agents.fixtures``.

Every line holds a ``response_text`` and either the ``prompt_sha256`` of the
prompt it answers or a ``role`` and ``source`` entity id. An entry may also
carry ``usage`` with ``prompt_tokens`` and ``completion_tokens``. Entries
sharing a key are served in file order and the last one is repeated once
the others are used up."""

from aligndebate.agents import IAgentBackend, RawAgentOutput, Usage
from aligndebate.exception import BackendError
import aligndebate.utils as utils
from collections import defaultdict, deque
import threading
import json
import logging

LOGGER = logging.getLogger(__name__)


def load_fixtures(path):
    """Reads a fixture file into a dictionary of key to entry list. Keys are
    either a sha256 string or a ``(role, source)`` tuple.

    :raises BackendError: if the file cannot be read or a line is invalid."""
    fixtures = defaultdict(list)
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().split("\n")
    except OSError as ex:
        raise BackendError("Could not read fixtures {0}: {1}".format(path, ex))
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
            text = entry["response_text"]
            if "prompt_sha256" in entry:
                key = entry["prompt_sha256"]
            else:
                key = (entry["role"], int(entry["source"]))
            usage = entry.get("usage")
            if usage is not None:
                usage = Usage(int(usage["prompt_tokens"]),
                              int(usage["completion_tokens"]))
        except (ValueError, KeyError, TypeError) as ex:
            raise BackendError("{0}:{1}: invalid fixture: {2}".format(
                path, number, ex))
        fixtures[key].append((text, usage))
    LOGGER.debug("Loaded {0} fixture keys from {1}".format(len(fixtures),
                                                           path))
    return fixtures


class ScriptedBackend(IAgentBackend):
    """Backend answering from a fixture file."""

    def __init__(self):
        super().__init__("scripted", "Scripted")
        self._queues = {}
        self._lock = threading.Lock()

    def get_help(self):
        return __doc__

    def configure(self, config, ground_truth=None):
        super().configure(config, ground_truth)
        if not config.fixtures:
            raise BackendError("The scripted backend needs agents.fixtures")
        self.load(load_fixtures(config.fixtures))

    def load(self, fixtures):
        """Replaces the served entries with ``fixtures``, a dictionary as
        returned by :py:func:`load_fixtures`."""
        with self._lock:
            self._queues = {key: deque(entries)
                            for key, entries in fixtures.items()}

    def _next(self, key):
        queue = self._queues.get(key)
        if not queue:
            return None
        return queue.popleft() if len(queue) > 1 else queue[0]

    def complete(self, prompt):
        with self._lock:
            entry = self._next(prompt.sha256)
            if entry is None:
                entry = self._next((prompt.role, prompt.source))
        if entry is None:
            raise BackendError("No fixture for {0} prompt of entity {1} "
                               "(sha256 {2})".format(prompt.role,
                                                     prompt.source,
                                                     prompt.sha256))
        text, usage = entry
        if usage is None:
            usage = Usage(utils.estimate_tokens(prompt.text),
                          utils.estimate_tokens(text))
        return RawAgentOutput(text, usage)


def create():
    return ScriptedBackend()
