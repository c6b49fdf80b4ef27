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
"""This module contains several functions common to all modules."""

from aligndebate.exception import InvalidVersionError
import hashlib
import logging
import logging.handlers
import math
import os
import re
import gettext
import sys

LOGGER = logging.getLogger(__name__)

LANGUAGES = ["en"]
"""Languages looked up for translated command line messages."""

DEFAULT_USER_LOG_LOCATION = os.path.expanduser(
    "~/.local/log/aligndebate/aligndebate.log")
"""The default location for AlignDebate's log files."""

TOKENS_PER_WORD = 1.3
"""Multiplier turning a whitespace word count into a token estimate."""


def multireplace(string, replacements):
    """
    Given a string and a replacement map, it returns the replaced string.

    :param str string: string to execute replacements on
    :param dict replacements: replacement dictionary
                              {value to find: value to replace}
    :returns: a string with the replaced text."""
    if not replacements:
        return string
    # Place longer ones first to keep shorter substrings from matching where
    # the longer ones should take place
    substrs = sorted(replacements, key=len, reverse=True)
    regexp = re.compile('|'.join(map(re.escape, substrs)))
    return regexp.sub(lambda match: replacements[match.group(0)], string)


def estimate_tokens(text):
    """Estimates the token count of a text as its whitespace-delimited word
    count times :py:data:`TOKENS_PER_WORD`, rounded up.

    :param text: the string to measure.
    :returns: a non-negative integer."""
    return words_to_tokens(len(text.split()))


def words_to_tokens(words):
    """Converts a word count to the token estimate used by
    :py:func:`estimate_tokens`."""
    return int(math.ceil(words * TOKENS_PER_WORD))


def sha256_text(text):
    """Returns the hex sha256 of the UTF-8 encoding of ``text``."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def start_logging_handler(log_loc,
                          stream_level=logging.WARNING,
                          file_level=logging.DEBUG):
    if os.path.dirname(log_loc):
        os.makedirs(os.path.dirname(log_loc), exist_ok=True)
    logger = logging.getLogger()
    logger.setLevel(file_level if file_level < stream_level else stream_level)
    formatter = logging.Formatter(
        "%(levelname)s - %(asctime)s - %(name)s - %(message)s")

    def enableHandler(hand, level, formatter):
        hand.setLevel(level)
        hand.setFormatter(formatter)
        logger.addHandler(hand)

    handler = logging.handlers.TimedRotatingFileHandler(
        log_loc, when="D", interval=1, backupCount=15)
    enableHandler(handler, file_level, formatter)
    streamHandler = logging.StreamHandler()
    enableHandler(streamHandler, stream_level, formatter)
    logging.getLogger("yapsy").setLevel(logging.INFO)
    logging.getLogger("urllib3").setLevel(logging.INFO)


def enable_localization():
    """Activates the `gettext` module to start internalization and enable
    translation. Falls back to untranslated messages when no catalog is
    installed."""
    LOGGER.debug("Enabling localization")
    lodir = os.path.dirname(os.path.realpath(__file__)) + "/resources/locale"
    es = gettext.translation("aligndebate", localedir=lodir,
                             languages=LANGUAGES, fallback=True)
    es.install()


def check_python_version():
    """This method tests if the running version of python supports
    AlignDebate. If it does not, it raises a InvalidVersionError"""
    try:
        assert sys.version_info >= (3, 6)
    except AssertionError:
        info = sys.version_info
        raise InvalidVersionError(
            "Python version {major}.{minor} not supported. AlignDebate "
            "requires at least Python 3.6\n"
            "Considering installing AlignDebate with the pip3 command to "
            "insure it installs with Python3.".format(major=info[0],
                                                      minor=info[1]))
