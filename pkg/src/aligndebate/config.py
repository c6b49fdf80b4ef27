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
"""Pipeline configuration: a flat ``module.key`` namespace read from JSON
files and overridden by command line flags."""

from aligndebate.exception import ConfigError
import aligndebate.utils as utils
from collections import namedtuple
import json
import logging

LOGGER = logging.getLogger(__name__)

Option = namedtuple("Option", ["key", "default", "kind", "help"])
"""One configuration key. ``kind`` is one of ``int``, ``float``, ``bool``,
``str``, ``intlist`` or ``strlist``; ``str`` keys may be None."""

OPTIONS = [
    # data
    Option("data.dir", None, "str",
           "Directory holding the dataset in the DBP15K file layout."),
    Option("data.name", "dataset", "str",
           "Dataset name recorded in manifests and reports."),
    Option("data.source_embeddings", "embeddings_1.bin", "str",
           "Source embedding file, relative to data.dir. Files ending in "
           ".jsonl are read as JSON lines."),
    Option("data.target_embeddings", "embeddings_2.bin", "str",
           "Target embedding file, relative to data.dir."),
    # similarity
    Option("similarity.metric", "csls", "str",
           "Retrieval similarity, 'cosine' or 'csls'."),
    Option("similarity.csls_k", 10, "int",
           "Neighbourhood size of the CSLS hubness penalty."),
    Option("similarity.normalize", True, "bool",
           "Min-max normalise each source row of scores into [0, 1]. "
           "The Top-1 prior is then 1.0, so a debate in which every "
           "agent abstains never grows the ladder; turn this off to "
           "expand on raw scores."),
    Option("similarity.chunk_rows", 1024, "int",
           "Source rows scored per block when building the score matrix."),
    # retrieval
    Option("retrieval.k", 20, "int",
           "Number of candidates retrieved per source entity."),
    Option("retrieval.target_pool", "all", "str",
           "Targets searched: 'all' target entities or only 'test' pair "
           "targets."),
    # corpus
    Option("corpus.floor", 0.0, "float",
           "Minimum name similarity kept for name negatives. 0 keeps all."),
    Option("corpus.random_negatives", False, "bool",
           "Also emit one uniformly sampled negative per seed pair."),
    Option("corpus.seed", 0, "int",
           "Random seed used for random negatives."),
    # debate
    Option("debate.delta1", 0.05, "float",
           "Top-1/Top-2 gap below which an entity is uncertain."),
    Option("debate.delta2", 0.5, "float",
           "Top score below which the candidate ladder may expand. "
           "Compared with the blended score, which keeps the Top-1 "
           "prior when agents abstain."),
    Option("debate.max_rounds", 3, "int",
           "Maximum number of deep debate rounds."),
    Option("debate.ladder", [5, 10, 15, 20], "intlist",
           "Candidate subset sizes debated, in order."),
    Option("debate.w_sim", 0.3, "float",
           "Weight of the similarity prior in aggregate scores."),
    Option("debate.w_agents", 0.7, "float",
           "Weight of the mean specialist score in aggregate scores."),
    Option("debate.compression_budget", 0.15, "float",
           "Fraction of the original profile tokens kept by compression."),
    Option("debate.compression_floor", 32, "int",
           "Smallest token budget a compressed profile is allowed."),
    Option("debate.ldv_confidence_floor", 0.6, "float",
           "Referee top score below which verification forwards an entity."),
    Option("debate.judge_delta_cap", 0.2, "float",
           "Absolute bound applied to judge score adjustments."),
    Option("debate.workers", 4, "int",
           "Entities debated concurrently."),
    Option("debate.enable_ldv", True, "bool",
           "Run lightweight debate verification."),
    Option("debate.enable_dda", True, "bool",
           "Run deep debate alignment."),
    # agents
    Option("agents.mode", "offline", "str",
           "'offline' (fixtures, oracle or abstain backends) or 'live'."),
    Option("agents.backend", "oracle", "str",
           "Agent backend: http, scripted, oracle, abstain or a plugin "
           "name."),
    Option("agents.endpoint", None, "str",
           "Base URL of an OpenAI compatible chat completion service."),
    Option("agents.model", "gpt-3.5-turbo", "str",
           "Model name sent to the endpoint."),
    Option("agents.temperature", 0.0, "float",
           "Sampling temperature."),
    Option("agents.max_retries", 2, "int",
           "Retries of a failed call or of an unparseable answer."),
    Option("agents.timeout", 60.0, "float",
           "Per request timeout in seconds."),
    Option("agents.max_in_flight", 4, "int",
           "Concurrent requests allowed against the endpoint."),
    Option("agents.api_key_env", "OPENAI_API_KEY", "str",
           "Environment variable holding the API key."),
    Option("agents.fixtures", None, "str",
           "JSON lines file of scripted responses."),
    Option("agents.plugin_dirs", [], "strlist",
           "Extra directories searched for backend plugins."),
    # synthetic
    Option("synthetic.entities", 200, "int",
           "Entities per side of a generated dataset."),
    Option("synthetic.collision_rate", 0.3, "float",
           "Fraction of entities sharing their name with another entity."),
    Option("synthetic.attribute_noise", 0.1, "float",
           "Probability a target attribute value is perturbed."),
    Option("synthetic.dim", 16, "int",
           "Dimension of each generated embedding feature."),
    Option("synthetic.train_ratio", 0.3, "float",
           "Fraction of generated pairs written as seed pairs."),
    Option("synthetic.seed", 0, "int",
           "Random seed of the generator."),
    # run
    Option("run.out", "out", "str",
           "Directory where artifacts are written."),
    Option("log.file", utils.DEFAULT_USER_LOG_LOCATION, "str",
           "Log file location."),
]

OPTION_MAP = {option.key: option for option in OPTIONS}

DEFAULTS = {option.key: option.default for option in OPTIONS}
"""Default value of every configuration key."""

ALIASES = {
    "delta1": "debate.delta1",
    "delta2": "debate.delta2",
    "rounds": "debate.max_rounds",
    "ladder": "debate.ladder",
    "mode": "agents.mode",
    "out": "run.out",
}
"""Short command line flags and the keys they set."""

MODES = ("offline", "live")

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def coerce(key, value):
    """Converts ``value`` to the kind declared for ``key``. Strings (from the
    command line) are parsed, native JSON values are type checked.

    :param key: the configuration key.
    :param value: the raw value.
    :raises ConfigError: if the key is unknown or the value has the wrong
                         kind.
    :returns: the converted value."""
    if key not in OPTION_MAP:
        raise ConfigError(key, "unknown configuration key")
    kind = OPTION_MAP[key].kind
    try:
        if kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in _TRUE:
                return True
            if isinstance(value, str) and value.lower() in _FALSE:
                return False
            raise ValueError(value)
        elif kind == "int":
            if isinstance(value, bool) or isinstance(value, float):
                raise ValueError(value)
            return int(value)
        elif kind == "float":
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        elif kind == "intlist":
            if isinstance(value, str):
                value = [x for x in value.split(",") if x.strip()]
            return [int(x) for x in value]
        elif kind == "strlist":
            if isinstance(value, str):
                value = [x for x in value.split(",") if x.strip()]
            return [str(x) for x in value]
        else:
            if value is None:
                return None
            if not isinstance(value, str):
                raise ValueError(value)
            return value
    except (TypeError, ValueError):
        raise ConfigError(key, "expected a value of kind {0}, got {1!r}"
                          .format(kind, value))


class PipelineConfig(object):
    """A validated set of configuration values. Values are read with item
    access, ``cfg["debate.delta1"]``.

    :param values: a dictionary of ``module.key`` values overriding the
                   defaults.
    :raises ConfigError: if a key is unknown or a value invalid."""

    def __init__(self, values=None):
        self._values = dict(DEFAULTS)
        for key, value in (values or {}).items():
            self._values[key] = coerce(key, value)
        self.validate()

    @classmethod
    def load(cls, path=None, overrides=None):
        """Builds a configuration from an optional JSON file and a dictionary
        of overrides, which take precedence over the file.

        :param path: path of a JSON object with flat ``module.key`` names, or
                     None.
        :param overrides: a dictionary of overriding values.
        :raises ConfigError: for unreadable files, unknown keys or invalid
                             values."""
        values = {}
        if path is not None:
            try:
                with open(path, encoding="utf-8") as f:
                    loaded = json.load(f)
            except (OSError, ValueError) as ex:
                raise ConfigError(None, "Could not read config file {0}: {1}"
                                  .format(path, ex))
            if not isinstance(loaded, dict):
                raise ConfigError(None, "Config file {0} must hold a JSON "
                                  "object".format(path))
            values.update(loaded)
            LOGGER.debug("Loaded {0} keys from {1}".format(len(loaded), path))
        for key, value in (overrides or {}).items():
            values[ALIASES.get(key, key)] = value
        return cls(values)

    def __getitem__(self, key):
        if key not in self._values:
            raise ConfigError(key, "unknown configuration key")
        return self._values[key]

    def __contains__(self, key):
        return key in self._values

    def replace(self, **changes):
        """Returns a copy with some values changed. Keyword names use ``__``
        in place of the dot, ``debate__delta1=0.1``."""
        values = dict(self._values)
        for name, value in changes.items():
            values[name.replace("__", ".", 1)] = value
        return PipelineConfig(values)

    def as_dict(self):
        """Returns a sorted copy of every value."""
        return {key: self._values[key] for key in sorted(self._values)}

    def validate(self):
        """Checks value ranges and the run mode requirements.

        :raises ConfigError: on the first invalid value."""
        v = self._values
        if v["similarity.metric"] not in ("cosine", "csls"):
            raise ConfigError("similarity.metric",
                              "must be 'cosine' or 'csls'")
        for key in ("similarity.csls_k", "similarity.chunk_rows",
                    "retrieval.k", "debate.max_rounds", "debate.workers",
                    "agents.max_in_flight", "debate.compression_floor"):
            if v[key] < 1:
                raise ConfigError(key, "must be a positive integer")
        if v["retrieval.target_pool"] not in ("all", "test"):
            raise ConfigError("retrieval.target_pool",
                              "must be 'all' or 'test'")
        if v["debate.delta1"] < 0:
            raise ConfigError("debate.delta1", "must not be negative")
        budget = v["debate.compression_budget"]
        if not 0 < budget <= 1:
            raise ConfigError("debate.compression_budget",
                              "must lie in (0, 1]")
        ladder = v["debate.ladder"]
        if not ladder:
            raise ConfigError("debate.ladder", "must not be empty")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("debate.ladder", "must be strictly increasing")
        if ladder[0] < 2:
            raise ConfigError("debate.ladder", "first rung must be at least 2")
        if ladder[-1] > v["retrieval.k"]:
            raise ConfigError("debate.ladder", "last rung {0} exceeds "
                              "retrieval.k {1}".format(ladder[-1],
                                                       v["retrieval.k"]))
        if v["agents.temperature"] < 0:
            raise ConfigError("agents.temperature", "must not be negative")
        if v["agents.max_retries"] < 0:
            raise ConfigError("agents.max_retries", "must not be negative")
        if v["agents.timeout"] <= 0:
            raise ConfigError("agents.timeout", "must be positive")
        if not 0 <= v["synthetic.collision_rate"] <= 1:
            raise ConfigError("synthetic.collision_rate",
                              "must lie in [0, 1]")
        if not 0 < v["synthetic.train_ratio"] < 1:
            raise ConfigError("synthetic.train_ratio", "must lie in (0, 1)")
        mode = v["agents.mode"]
        if mode not in MODES:
            raise ConfigError("agents.mode", "must be 'offline' or 'live'")
        backend = v["agents.backend"]
        if mode == "live":
            if backend != "http":
                raise ConfigError("agents.backend",
                                  "live mode requires the http backend")
            if not v["agents.endpoint"]:
                raise ConfigError("agents.endpoint",
                                  "live mode requires an endpoint")
        else:
            if backend == "http":
                raise ConfigError("agents.backend", "the http backend "
                                  "requires agents.mode live")
            if backend == "scripted" and not v["agents.fixtures"]:
                raise ConfigError("agents.fixtures", "the scripted backend "
                                  "requires a fixture file")
