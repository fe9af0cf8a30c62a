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

"""Config Parameter Modeling and Parsing"""

from hexkit.config import config_from_yaml
from hexkit.log import LoggingConfig
from pydantic import Field

from dtn_inverse.field_core.core.hodge import HodgeConfig
from dtn_inverse.forward.core.crank_nicolson import ForwardConfig
from dtn_inverse.go.core.solutions import GoConfig
from dtn_inverse.harness.models import HarnessConfig
from dtn_inverse.recon.core.rules import ReconConfig
from dtn_inverse.transport.core.n_omega import TransportConfig

SERVICE_NAME = "dtn_inverse"


@config_from_yaml(prefix=SERVICE_NAME)
class Config(
    HodgeConfig,
    TransportConfig,
    ForwardConfig,
    GoConfig,
    ReconConfig,
    HarnessConfig,
    LoggingConfig,
):
    """Config parameters and their defaults."""

    service_name: str = Field(
        default=SERVICE_NAME, description="Short name of this package"
    )
    service_instance_id: str = Field(
        default="local", description="Identifier of this run in the log records"
    )


CONFIG = Config()  # type: ignore


def get_config() -> Config:
    """Get runtime configuration."""
    return CONFIG
