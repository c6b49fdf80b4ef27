#! /usr/bin/env python3
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
"""The ``aligndebate`` command. Every configuration key is also a flag, so
``--debate.delta1 0.1`` overrides the value of a ``--config`` file."""

import aligndebate.config as config
from aligndebate.exception import (InvalidVersionError, ConfigError,
                                   PipelineError)
import aligndebate.pipeline.runner as runner
import aligndebate.pipeline.synthetic as synthetic
import aligndebate.utils as utils
import argparse
import json
import logging
import sys

LOGGER = logging.getLogger(__name__)

DEFAULT_LENGTH = 60

COMMANDS = ["ingest", "build-corpus", "retrieve", "debate", "evaluate", "run",
            "synthesize"]


def _print_progress_bar(iteration,
                        total,
                        prefix='',
                        suffix='',
                        decimals=1,
                        length=DEFAULT_LENGTH,
                        fill='█'):
    """Prints a one line progress bar, ending the line when ``iteration``
    reaches ``total``."""
    percent = ("{0:." + str(decimals) + "f}").format(
        100 * (iteration / float(total)))
    filledLength = int(length * iteration // total)
    bar = fill * filledLength + '-' * (length - filledLength)
    print('\r%s |%s| %s%% %s' % (prefix, bar, percent, suffix), end='\r')
    if iteration == total:
        print()


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        help=_("A JSON file of configuration values. Flags override it."))
    group = common.add_mutually_exclusive_group()
    group.add_argument(
        "-v",
        "--verbose",
        help=_("Prints expanded output."),
        action="store_const",
        dest="loglevel",
        const=logging.INFO)
    group.add_argument(
        "-d",
        "--debug",
        help=_("Prints large output. Mainly helpful for developers."),
        action="store_const",
        dest="loglevel",
        const=logging.DEBUG)
    for alias, key in sorted(config.ALIASES.items()):
        common.add_argument(
            "--" + alias,
            dest=alias,
            help=_("Short for --{0}.").format(key))
    options = common.add_argument_group(_("configuration"))
    for option in config.OPTIONS:
        options.add_argument(
            "--" + option.key,
            dest=option.key,
            metavar=option.kind.upper(),
            help=_(option.help) + _(" Defaults to {0}.").format(
                option.default))
    return common


def build_parser():
    """Returns the argument parser of every subcommand."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="aligndebate",
        description=_("Entity alignment between two knowledge graphs by "
                      "embedding retrieval and multi-agent debate."))
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    helps = {
        "ingest": _("Load and check a dataset and its embeddings."),
        "build-corpus": _("Mine hard negatives and write the preference "
                          "corpus of the seed pairs."),
        "retrieve": _("Retrieve the candidates of every test source."),
        "debate": _("Debate the uncertain sources of a retrieval run."),
        "evaluate": _("Score the decisions of a debate run."),
        "run": _("Run every stage from loading to evaluation."),
        "synthesize": _("Generate a synthetic dataset in data.dir."),
    }
    for name in COMMANDS:
        commands.add_parser(name, parents=[common], help=helps[name])
    return parser


def _overrides(args):
    names = set(config.OPTION_MAP) | set(config.ALIASES)
    return {name: value for name, value in vars(args).items()
            if name in names and value is not None}


def _synthesize(cfg):
    with runner.stage("synthesize"):
        if not cfg["data.dir"]:
            raise ConfigError("data.dir", "no output directory given")
        try:
            return synthetic.generate(
                cfg["data.dir"], cfg["synthetic.entities"],
                cfg["synthetic.collision_rate"],
                cfg["synthetic.attribute_noise"], cfg["synthetic.dim"],
                cfg["synthetic.train_ratio"], cfg["synthetic.seed"],
                cfg["data.source_embeddings"], cfg["data.target_embeddings"])
        except ValueError as ex:
            raise ConfigError("synthetic.entities", str(ex))


def execute(command, cfg, progress=None):
    """Runs ``command`` with ``cfg``.

    :raises PipelineError: if a stage fails.
    :returns: a JSON ready summary of the result."""
    if command == "ingest":
        return runner.run_ingest(cfg)
    elif command == "build-corpus":
        return runner.run_corpus(cfg)
    elif command == "retrieve":
        candidate_map = runner.run_retrieve(cfg)
        return {"sources": len(candidate_map), "k": cfg["retrieval.k"]}
    elif command == "debate":
        result = runner.run_debate(cfg, progress)
        return {"decisions": len(result.decisions),
                "debated": len(result.transcripts)}
    elif command == "evaluate":
        return runner.run_evaluate(cfg)
    elif command == "run":
        return runner.run_pipeline(cfg, progress)
    elif command == "synthesize":
        return _synthesize(cfg)
    raise ValueError("Unknown command {0}".format(command))


def main(argv=None):
    """The entry point of the command line. For help use "aligndebate -h"
    after installation.

    :param argv: the arguments, ``sys.argv[1:]`` when None.
    :returns: the exit code: 0 on success, 2 for configuration errors, 3
              for data errors and 4 for backend failures."""
    utils.enable_localization()

    try:
        utils.check_python_version()
    except InvalidVersionError as ex:
        print(ex)
        return 1

    def progress(status):
        _print_progress_bar(int(status * 100), 100, prefix=_("Debating:"))

    try:
        args = build_parser().parse_args(argv)
        loglevel = (args.loglevel if args.loglevel in (logging.INFO,
                                                       logging.DEBUG)
                    else logging.WARNING)
        try:
            cfg = config.PipelineConfig.load(args.config, _overrides(args))
        except ConfigError as ex:
            print(_("Configuration error: {0}").format(ex), file=sys.stderr)
            return runner.EXIT_CONFIG
        utils.start_logging_handler(cfg["log.file"], stream_level=loglevel)
        try:
            result = execute(args.command, cfg, progress)
        except PipelineError as ex:
            print(str(ex), file=sys.stderr)
            return ex.exit_code
        print(json.dumps(result, indent=2, sort_keys=True))
        return 0
    except (KeyboardInterrupt, EOFError):
        LOGGER.info("Exiting via user keyboard interrupt.")
        LOGGER.debug("Error:\n", exc_info=sys.exc_info())
        return 1


if __name__ == "__main__":
    sys.exit(main())
