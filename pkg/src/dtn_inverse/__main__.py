# Copyright 2021 - 2024 Universität Tübingen, DKFZ, EMBL, and Universität zu Köln
# for the German Human Genome-Phenome Archive (GHGA)
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

"""Entrypoint of the package"""

from ghga_service_commons.utils.utc_dates import assert_tz_is_utc
from hexkit.log import configure_logging

from dtn_inverse.cli import app
from dtn_inverse.config import CONFIG, Config


def run(config: Config = CONFIG):
    """Run the command line interface."""
    configure_logging(config=config)
    assert_tz_is_utc()
    app()


if __name__ == "__main__":
    run()
