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
r"""This package contains the agent backends.

An agent backend is any class extending
:py:class:`~aligndebate.agents.IAgentBackend` inside a file whose name follows
the regex pattern "^aligndebate_.*\.py$". The bundled backends (``http``,
``scripted``, ``oracle`` and ``abstain``) live next to this file; third party
backends are found in the directories listed by ``agents.plugin_dirs``, in
/usr/local/aligndebate/plugins and in site-packages."""

from aligndebate.exception import (BackendError, ConfigError,
                                   PluginNotFoundError)
import aligndebate.utils as utils
from collections import namedtuple
from yapsy.IPlugin import IPlugin
import importlib
import logging
import sysconfig

LOGGER = logging.getLogger(__name__)

PROPONENT = "proponent"
OPPONENT = "opponent"
REFEREE = "referee"
ALIAS = "alias"
TYPE = "type"
ATTRIBUTE = "attribute"
NEIGHBORHOOD = "neighborhood"
ATTACK = "attack"
JUDGE = "judge"

LDV_ROLES = (PROPONENT, OPPONENT, REFEREE)
SPECIALIST_ROLES = (ALIAS, TYPE, ATTRIBUTE, NEIGHBORHOOD)
ROLES = LDV_ROLES + SPECIALIST_ROLES + (ATTACK, JUDGE)

BUNDLED_BACKENDS = {
    "http": "aligndebate.agents.aligndebate_http",
    "scripted": "aligndebate.agents.aligndebate_scripted",
    "oracle": "aligndebate.agents.aligndebate_oracle",
    "abstain": "aligndebate.agents.aligndebate_abstain",
}
"""Backend kinds shipped with AlignDebate and the modules defining them."""

PLUGIN_DIRS = [
    "/usr/local/aligndebate/plugins",
    sysconfig.get_paths()["purelib"],
]


class Usage(namedtuple("Usage", ["prompt_tokens", "completion_tokens"])):
    """Token counters of one agent call."""

    @property
    def total(self):
        return self.prompt_tokens + self.completion_tokens

    def __add__(self, other):
        return Usage(self.prompt_tokens + other.prompt_tokens,
                     self.completion_tokens + other.completion_tokens)


Usage.ZERO = Usage(0, 0)

RawAgentOutput = namedtuple("RawAgentOutput", ["text", "usage"])


class BackendConfig(object):
    """Settings shared by every backend kind.

    :param kind: the backend name, for example "http" or "oracle".
    :param endpoint: base URL of an OpenAI compatible service.
    :param model: the model name sent to the service.
    :param temperature: the sampling temperature, at least 0.
    :param max_retries: retries after a failed call, at least 0.
    :param timeout: seconds allowed per request.
    :param max_in_flight: concurrent requests allowed.
    :param api_key_env: the environment variable holding the API key.
    :param fixtures: path of the scripted fixture file.
    :param plugin_dirs: extra directories searched for plugins."""

    def __init__(self, kind="oracle", endpoint=None, model="gpt-3.5-turbo",
                 temperature=0.0, max_retries=2, timeout=60.0,
                 max_in_flight=4, api_key_env="OPENAI_API_KEY",
                 fixtures=None, plugin_dirs=()):
        if temperature < 0:
            raise ConfigError("agents.temperature", "must not be negative")
        if max_retries < 0:
            raise ConfigError("agents.max_retries", "must not be negative")
        self.kind = kind
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.max_retries = max_retries
        self.timeout = timeout
        self.max_in_flight = max_in_flight
        self.api_key_env = api_key_env
        self.fixtures = fixtures
        self.plugin_dirs = list(plugin_dirs)

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg["agents.backend"], cfg["agents.endpoint"],
                   cfg["agents.model"], cfg["agents.temperature"],
                   cfg["agents.max_retries"], cfg["agents.timeout"],
                   cfg["agents.max_in_flight"], cfg["agents.api_key_env"],
                   cfg["agents.fixtures"], cfg["agents.plugin_dirs"])


class IAgentBackend(IPlugin):
    r"""An interface class for agent backends. Backends must implement
    :py:func:`~.IAgentBackend.complete` and be safe to call from several
    threads at once.

    The name of a plugin should be its filename without the "aligndebate\_"
    prefix or a file extension, so "aligndebate_oracle.py" is "oracle".

    :param name: the unique name used in ``agents.backend``.
    :param prettyName: a human readable name for display."""

    def __init__(self, name, prettyName=None):
        super().__init__()
        self.name = name
        self.prettyName = prettyName if prettyName is not None else name
        self.config = None
        self.ground_truth = {}

    def configure(self, config, ground_truth=None):
        """Called once before the first call.

        :param config: a :py:class:`BackendConfig`.
        :param ground_truth: a dictionary of source id to true target id,
                             only used by backends that cheat on purpose."""
        self.config = config
        self.ground_truth = dict(ground_truth or {})

    def complete(self, prompt):
        """Answers one rendered prompt.

        :param prompt: a :py:class:`~aligndebate.agents.prompts.Prompt`.
        :raises BackendError: if no answer could be produced.
        :returns: a :py:class:`RawAgentOutput`."""
        raise NotImplementedError

    def get_help(self):
        """Returns the help message for this plugin."""
        return "Answers agent prompts with the {0} backend.".format(
            self.prettyName)


def _bundled(kind):
    module = importlib.import_module(BUNDLED_BACKENDS[kind])
    return module.create()


def _external(kind, plugin_dirs):
    # yapsy's PluginManager imports the removed imp module on Python 3.12+
    try:
        from yapsy.PluginManager import PluginManager
        from yapsy.PluginFileLocator import (PluginFileAnalyzerMathingRegex,
                                             PluginFileLocator)
    except ImportError as ex:
        LOGGER.warning("Plugin discovery unavailable: {0}".format(ex))
        return None
    regex_analyzer = PluginFileAnalyzerMathingRegex("regex",
                                                    r"^aligndebate_.*\.py$")
    locator = PluginFileLocator([regex_analyzer])
    manager = PluginManager(
        categories_filter={"backend": IAgentBackend},
        directories_list=list(plugin_dirs) + PLUGIN_DIRS,
        plugin_locator=locator)
    manager.collectPlugins()
    for info in manager.getAllPlugins():
        if info.plugin_object.name == kind:
            return info.plugin_object
    return None


def get_backend(config, ground_truth=None):
    """Returns a configured backend of kind ``config.kind``.

    :param config: a :py:class:`BackendConfig`.
    :param ground_truth: passed to :py:func:`IAgentBackend.configure`.
    :raises PluginNotFoundError: if no backend has that name."""
    if config.kind in BUNDLED_BACKENDS:
        backend = _bundled(config.kind)
    else:
        backend = _external(config.kind, config.plugin_dirs)
        if backend is None:
            raise PluginNotFoundError(
                "No backend named {0} was found".format(config.kind))
    backend.configure(config, ground_truth)
    LOGGER.debug("Using {0} backend".format(backend.prettyName))
    return backend


def call_agent(backend, prompt):
    """Sends ``prompt`` to ``backend``. Only the prompt's sha256 is logged.

    :raises BackendError: when the backend fails or reports negative usage.
    :returns: a :py:class:`RawAgentOutput`."""
    LOGGER.debug("{0} call, prompt sha256 {1}".format(
        prompt.role, utils.sha256_text(prompt.text)))
    output = backend.complete(prompt)
    if output.usage.prompt_tokens < 0 or output.usage.completion_tokens < 0:
        raise BackendError("Backend {0} reported negative token usage"
                           .format(backend.name))
    return output
