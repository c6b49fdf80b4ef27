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
"""Sends prompts to an OpenAI compatible chat completion service at
``agents.endpoint``. The API key is read from the environment variable named
by ``agents.api_key_env``. Connection errors and timeouts are retried
``agents.max_retries`` times."""

from aligndebate.agents import IAgentBackend, RawAgentOutput, Usage
from aligndebate.exception import BackendError
import aligndebate.utils as utils
from tenacity import (retry, stop_after_attempt, wait_exponential,
                      retry_if_exception_type)
import requests
import threading
import logging
import os

LOGGER = logging.getLogger(__name__)

COMPLETIONS_PATH = "/v1/chat/completions"

RETRIED = (requests.ConnectionError, requests.Timeout)


class HttpBackend(IAgentBackend):
    """Backend calling a chat completion endpoint over HTTP."""

    def __init__(self):
        super().__init__("http", "HTTP")
        self.wait = wait_exponential(multiplier=0.5, min=0.5, max=4)
        self._slots = None

    def get_help(self):
        return __doc__

    def configure(self, config, ground_truth=None):
        super().configure(config, ground_truth)
        if not config.endpoint:
            raise BackendError("The http backend needs agents.endpoint")
        self._slots = threading.BoundedSemaphore(config.max_in_flight)

    def url(self):
        return self.config.endpoint.rstrip("/") + COMPLETIONS_PATH

    def payload(self, prompt):
        """Returns the JSON body sent for ``prompt``."""
        return {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": self.config.temperature,
        }

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env or "")
        if key:
            headers["Authorization"] = "Bearer " + key
        return headers

    def _post(self, payload):
        with self._slots:
            return requests.post(self.url(), json=payload,
                                 headers=self._headers(),
                                 timeout=self.config.timeout)

    def complete(self, prompt):
        retrying = retry(reraise=True,
                         stop=stop_after_attempt(self.config.max_retries + 1),
                         wait=self.wait,
                         retry=retry_if_exception_type(RETRIED))
        try:
            response = retrying(self._post)(self.payload(prompt))
        except requests.RequestException as ex:
            LOGGER.error("{0} call failed after {1} attempts".format(
                prompt.role, self.config.max_retries + 1))
            raise BackendError("Request to {0} failed: {1}".format(
                self.url(), type(ex).__name__), errors=str(ex))

        if not 200 <= response.status_code < 300:
            raise BackendError("Endpoint answered {0} call with an error"
                               .format(prompt.role),
                               status=response.status_code,
                               errors=response.text[:200])
        try:
            obj = response.json()
            text = obj["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as ex:
            raise BackendError("Malformed completion response: {0}"
                               .format(ex), status=response.status_code)
        if text is None:
            text = ""
        usage = obj.get("usage") or {}
        return RawAgentOutput(text, Usage(
            int(usage.get("prompt_tokens",
                          utils.estimate_tokens(prompt.text))),
            int(usage.get("completion_tokens", utils.estimate_tokens(text)))))


def create():
    return HttpBackend()
