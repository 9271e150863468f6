"""Experiment configuration: environment settings and the ExperimentConfig model."""

import json
import os
from enum import Enum
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import ConfigError
from src.games.make_game import GameSpec, game_spec_from_dict
from src.models.cfr import RtReach
from src.models.records import default_eval_every
from src.models.rt_nfg import Averaging, Regularizer

### Configuration
load_dotenv()

THREADS = int(os.getenv("EQUILIBRATE_THREADS", "1"))
OUTPUT_DIR = os.getenv("EQUILIBRATE_OUTPUT_DIR", "runs")
LOG_LEVEL = os.getenv("EQUILIBRATE_LOG_LEVEL", "INFO")


class Algorithm(str, Enum):
    RM = "RM"
    RM_PLUS = "RM_PLUS"
    MWU = "MWU"
    OMWU = "OMWU"
    GDA = "GDA"
    OGDA = "OGDA"
    CFR = "CFR"
    CFR_PLUS = "CFR_PLUS"
    RTRM_PLUS = "RTRM_PLUS"
    RTCFR_PLUS = "RTCFR_PLUS"
    RT_MWU = "RT_MWU"
    RT_OMWU = "RT_OMWU"
    DOGDA = "DOGDA"


# Need a matrix game (or a tree that is an embedded matrix game)
MATRIX_ALGORITHMS = {
    Algorithm.RM,
    Algorithm.RM_PLUS,
    Algorithm.MWU,
    Algorithm.OMWU,
    Algorithm.GDA,
    Algorithm.OGDA,
    Algorithm.RTRM_PLUS,
}
RT_ALGORITHMS = {Algorithm.RTRM_PLUS, Algorithm.RTCFR_PLUS, Algorithm.RT_MWU, Algorithm.RT_OMWU}
STEP_ALGORITHMS = {
    Algorithm.MWU,
    Algorithm.OMWU,
    Algorithm.GDA,
    Algorithm.OGDA,
    Algorithm.RT_MWU,
    Algorithm.RT_OMWU,
    Algorithm.DOGDA,
}

DEFAULT_LEARNING_RATE = {
    Algorithm.MWU: 0.1,
    Algorithm.OMWU: 0.1,
    Algorithm.GDA: 0.1,
    Algorithm.OGDA: 0.1,
    Algorithm.RT_MWU: 0.1,
    Algorithm.RT_OMWU: 0.1,
    Algorithm.DOGDA: 2.0,
}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    game: GameSpec
    algorithm: Algorithm
    mu: float = Field(default=0.1, ge=0)
    inner_iterations: int = Field(default=10, ge=0)
    outer_iterations: int = Field(default=100, ge=0)
    learning_rate: Optional[float] = Field(default=None, gt=0)
    regularizer: Optional[Regularizer] = None
    alternating: bool = True
    averaging: Averaging = Averaging.NONE
    total_iterations: Optional[int] = Field(default=None, ge=0)
    eval_every: Optional[int] = Field(default=None, ge=1)
    # run label only; every solver here is deterministic and random games carry their own seed
    seed: int = 0
    rt_reach: RtReach = RtReach.FULL
    gap_threshold: Optional[float] = Field(default=None, gt=0)
    beta: float = Field(default=1.0, gt=0)
    record_wall_time: bool = False
    output: Optional[str] = None

    @model_validator(mode="after")
    def _check_iterations(self):
        if self.algorithm in RT_ALGORITHMS:
            planned = self.inner_iterations * self.outer_iterations
            if self.total_iterations is not None and self.total_iterations != planned:
                raise ValueError(f"total_iterations {self.total_iterations} differs from T*N = {planned}")
        elif self.total_iterations is None:
            raise ValueError(f"{self.algorithm.value} needs total_iterations")
        return self

    @property
    def iterations(self):
        if self.algorithm in RT_ALGORITHMS:
            return self.inner_iterations * self.outer_iterations
        return self.total_iterations

    @property
    def step_size(self):
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_LEARNING_RATE.get(self.algorithm)

    def resolved_eval_every(self):
        return self.eval_every or default_eval_every(self.iterations)

    def run_name(self):
        return self.name or f"{self.algorithm.value.lower()}_{self.game.label()}"

    def to_json(self):
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def parse_config(data):
    """Validate a config mapping; failures become ConfigError with a specific code."""
    if not isinstance(data, dict):
        raise ConfigError("a config must be a JSON object")
    algorithm = data.get("algorithm")
    if algorithm not in {a.value for a in Algorithm}:
        raise ConfigError(f"unknown algorithm {algorithm!r}", code="UNKNOWN_ALGORITHM")
    game = data.get("game")
    if isinstance(game, dict):
        game_spec_from_dict(game)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def load_config(path, overrides=None):
    """Read a JSON config file; non-None `overrides` replace top-level fields."""
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from e
    if isinstance(data, dict):
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return parse_config(data)
