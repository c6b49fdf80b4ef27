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

# flake8: noqa

import sys
import os

myPath = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, myPath + "/../src/")

import hashlib
import logging
import pytest
import aligndebate.utils as utils
from aligndebate.exception import InvalidVersionError


def test_multireplace_prefers_longer_keys():
    result = utils.multireplace("<A> <AB>", {"<A>": "1", "<AB>": "2"})
    assert result == "1 2"


def test_multireplace_does_not_rescan_output():
    assert utils.multireplace("<X>", {"<X>": "<Y>", "<Y>": "z"}) == "<Y>"


def test_multireplace_empty_map():
    assert utils.multireplace("unchanged", {}) == "unchanged"


def test_estimate_tokens():
    assert utils.estimate_tokens("") == 0
    assert utils.estimate_tokens("one") == 2
    assert utils.estimate_tokens("one two") == 3
    assert utils.estimate_tokens("  spaced\n\tout  words ") == 4


def test_words_to_tokens_monotone():
    values = [utils.words_to_tokens(w) for w in range(200)]
    assert values == sorted(values)
    assert all(v >= w for w, v in enumerate(values))


def test_sha256_text():
    assert utils.sha256_text("abc") == hashlib.sha256(b"abc").hexdigest()
    assert utils.sha256_text("é") == hashlib.sha256(
        "é".encode("utf-8")).hexdigest()


def test_check_python_version(monkeypatch):
    utils.check_python_version()
    monkeypatch.setattr(utils.sys, "version_info", (3, 4, 0))
    with pytest.raises(InvalidVersionError):
        utils.check_python_version()


def test_start_logging_handler_creates_directory(tmp_path):
    root = logging.getLogger()
    before = list(root.handlers)
    log_file = tmp_path / "logs" / "run.log"
    try:
        utils.start_logging_handler(str(log_file))
        assert (tmp_path / "logs").is_dir()
    finally:
        for handler in root.handlers[len(before):]:
            handler.close()
        root.handlers = before


def test_enable_localization_installs_gettext():
    utils.enable_localization()
    assert _("plain text") == "plain text"
