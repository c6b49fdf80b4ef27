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
"""Exceptions used by AlignDebate"""


class GraphFormatError(Exception):
    """Exception thrown when a row of a knowledge graph input file cannot be
    read."""

    def __init__(self, path, line, message, errors=None):
        self.path = path
        self.line = line
        self.message = message
        self.errors = errors

    def __str__(self):
        return "{0}:{1}: {2}".format(self.path, self.line, self.message)


class DanglingEntityError(Exception):
    """Exception thrown when a triple or pair references an entity id that
    the entity table does not contain."""

    def __init__(self, entity, path=None, line=None):
        self.entity = entity
        self.path = path
        self.line = line
        self.message = "Unknown entity id {0}".format(entity)

    def __str__(self):
        if self.path is None:
            return self.message
        return "{0}:{1}: {2}".format(self.path, self.line, self.message)


class EntityNotFoundError(Exception):
    """Exception thrown when a query names an entity that is not in the
    graph."""

    def __init__(self, entity):
        self.entity = entity
        self.message = "Entity {0} not found".format(entity)

    def __str__(self):
        return self.message


class EmbeddingError(Exception):
    """Base class of the errors raised by the embedding index."""

    def __init__(self, message, errors=None):
        self.message = message
        self.errors = errors

    def __str__(self):
        return self.message


class InvalidVectorError(EmbeddingError):
    """Exception thrown when a vector holds NaN or infinite entries."""
    pass


class DimensionMismatchError(EmbeddingError):
    """Exception thrown when two vectors or a vector and its store disagree on
    dimension."""
    pass


class UndefinedSimilarityError(EmbeddingError):
    """Exception thrown when a similarity is requested for an all-zero
    vector."""
    pass


class ConfigError(Exception):
    """Exception thrown to show an invalid configuration value."""

    def __init__(self, key, message):
        self.key = key
        self.message = message

    def __str__(self):
        if self.key is None:
            return self.message
        return "{0}: {1}".format(self.key, self.message)


class RetrievalError(Exception):
    """Exception thrown when candidate sets cannot be built or queried."""

    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


class CorpusError(Exception):
    """Exception thrown when a preference pair cannot be rendered into the
    training corpus."""

    def __init__(self, pair, message):
        self.pair = pair
        self.message = message

    def __str__(self):
        return "{0} ({1})".format(self.message, self.pair)


class RenderError(Exception):
    """Exception thrown when a prompt template cannot be completely
    rendered."""

    def __init__(self, role, field, message=None):
        self.role = role
        self.field = field
        self.message = message or "missing context field '{0}'".format(field)

    def __str__(self):
        return "{0} prompt: {1}".format(self.role, self.message)


class PromptChecksumError(Exception):
    """Exception thrown when a prompt asset does not match its pinned
    checksum."""
    pass


class BackendError(Exception):
    """Exception thrown when an agent backend fails to produce an answer,
    after its retries are exhausted."""

    def __init__(self, message, status=None, errors=None):
        self.message = message
        self.status = status
        self.errors = errors

    def __str__(self):
        if self.status is None:
            return self.message
        return "{0} (status {1})".format(self.message, self.status)


class VerdictParseError(Exception):
    """Exception thrown when an agent's output cannot be read as the role's
    verdict schema."""

    def __init__(self, role, message, raw=None):
        self.role = role
        self.message = message
        self.raw = raw

    def __str__(self):
        return "{0} output: {1}".format(self.role, self.message)


class EvaluationError(Exception):
    """Exception thrown for invalid metric inputs."""
    pass


class PipelineError(Exception):
    """Exception thrown when a pipeline stage fails. The stage name and the
    exit code the command line should use are attached."""

    def __init__(self, stage, message, exit_code=1, errors=None):
        self.stage = stage
        self.message = message
        self.exit_code = exit_code
        self.errors = errors

    def __str__(self):
        return "[{0}] {1}".format(self.stage, self.message)


class PluginNotFoundError(Exception):
    """Exception thrown when the passed plugin is not found."""
    pass


class InvalidVersionError(Exception):
    """Exception thrown when the running Python is too old for
    AlignDebate."""
    pass
