"""Build games from a GameSpec or from a compact command-line spec."""

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import ConfigError
from src.games.goofspiel import MAX_CARDS, MIN_CARDS, goofspiel
from src.games.kuhn import kuhn_poker
from src.games.leduc import leduc_poker
from src.games.liars_dice import MAX_SIDES, MIN_SIDES, liars_dice
from src.games.nfg import MatrixGame
from src.games.random_nfg import random_nfg

logger = logging.getLogger(__name__)


class GameKind(str, Enum):
    RANDOM_NFG = "RANDOM_NFG"
    MATRIX = "MATRIX"
    KUHN = "KUHN"
    LEDUC = "LEDUC"
    GOOFSPIEL = "GOOFSPIEL"
    LIARS_DICE = "LIARS_DICE"


MATRIX_KINDS = (GameKind.RANDOM_NFG, GameKind.MATRIX)


class GameSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: GameKind
    rows: Optional[int] = Field(default=None, ge=1)
    cols: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    n: Optional[int] = Field(default=None, ge=MIN_CARDS, le=MAX_CARDS)
    sides: Optional[int] = Field(default=None, ge=MIN_SIDES, le=MAX_SIDES)
    payoff: Optional[list[list[float]]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check_params(self):
        if self.kind == GameKind.RANDOM_NFG and (self.rows is None or self.cols is None):
            raise ValueError("RANDOM_NFG needs rows and cols")
        if self.kind == GameKind.MATRIX and (self.payoff is None) == (self.path is None):
            raise ValueError("MATRIX needs exactly one of payoff or path")
        if self.kind == GameKind.GOOFSPIEL and self.n is None:
            raise ValueError("GOOFSPIEL needs n")
        if self.kind == GameKind.LIARS_DICE and self.sides is None:
            raise ValueError("LIARS_DICE needs sides")
        return self

    @property
    def is_matrix(self):
        return self.kind in MATRIX_KINDS

    def label(self):
        if self.kind == GameKind.RANDOM_NFG:
            return f"random_nfg_{self.rows}x{self.cols}_seed{self.seed}"
        if self.kind == GameKind.GOOFSPIEL:
            return f"goofspiel_{self.n}"
        if self.kind == GameKind.LIARS_DICE:
            return f"liars_dice_{self.sides}"
        return self.kind.value.lower()


def game_spec_from_dict(data):
    if isinstance(data, dict) and data.get("kind") not in {k.value for k in GameKind}:
        raise ConfigError(f"unknown game kind {data.get('kind')!r}", code="UNKNOWN_GAME")
    try:
        return GameSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def parse_game_spec(text):
    """Compact forms: kuhn, leduc, goofspiel:4, liars_dice:2, random_nfg:5x5:0, matrix:<json file>."""
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "kuhn":
            return game_spec_from_dict({"kind": "KUHN"})
        if name == "leduc":
            return game_spec_from_dict({"kind": "LEDUC"})
        if name == "goofspiel":
            return game_spec_from_dict({"kind": "GOOFSPIEL", "n": int(rest)})
        if name == "liars_dice":
            return game_spec_from_dict({"kind": "LIARS_DICE", "sides": int(rest)})
        if name == "random_nfg":
            shape, _, seed = rest.partition(":")
            rows, _, cols = shape.partition("x")
            return game_spec_from_dict({"kind": "RANDOM_NFG", "rows": int(rows), "cols": int(cols), "seed": int(seed or 0)})
        if name == "matrix":
            return game_spec_from_dict({"kind": "MATRIX", "path": rest})
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"malformed game spec {text!r}: {e}") from e
    raise ConfigError(f"unknown game {text!r}", code="UNKNOWN_GAME")


def _load_matrix(spec):
    if spec.payoff is not None:
        return MatrixGame(spec.payoff)
    try:
        data = json.loads(Path(spec.path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read matrix file {spec.path!r}: {e}") from e
    if isinstance(data, dict):
        return MatrixGame.from_dict(data)
    return MatrixGame(data)


def make_game(spec):
    """MatrixGame for the matrix kinds, TreeGame for the rest."""
    logger.info(f"Building game {spec.label()}")
    if spec.kind == GameKind.RANDOM_NFG:
        return random_nfg(spec.rows, spec.cols, spec.seed)
    if spec.kind == GameKind.MATRIX:
        return _load_matrix(spec)
    if spec.kind == GameKind.KUHN:
        return kuhn_poker()
    if spec.kind == GameKind.LEDUC:
        return leduc_poker()
    if spec.kind == GameKind.GOOFSPIEL:
        return goofspiel(spec.n)
    return liars_dice(spec.sides)
