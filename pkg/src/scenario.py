"""
Scenario documents: one queueing model plus its numerical settings.

A scenario is a JSON object, e.g.

    {"model": "priority",
     "arrivals":   {"type": "bimodal", "p": 0.0667, "m": 6},
     "arrivals_b": {"type": "bimodal", "p": 0.4, "m": 1},
     "order": 256}

Missing numerical fields take the configured defaults; command-line
flags override both.
"""
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .errors import ScenarioError
from .models import TAIL_MARGIN, ModelKind, ModelSpec
from .pgf import Pgf, from_json
from .series import MAX_ORDER

logger = logging.getLogger(__name__)

STDIN = "-"
NUMERIC_FIELDS = ("order", "r_max", "truncation", "tol", "max_iterations")
_MODEL_FIELDS = ("model", "arrivals", "arrivals_b", "service_p", "name")
TWO_FLOWS = (ModelKind.PRIORITY, ModelKind.TANDEM)


@dataclass(frozen=True)
class Scenario:
    """A validated model with the settings its pipelines run at."""

    model: ModelKind
    arrivals: Pgf
    arrivals_b: Optional[Pgf] = None
    service_p: float = 1.0
    order: int = 128
    r_max: int = 40
    truncation: int = 200
    tol: float = 1e-12
    max_iterations: int = 1_000_000
    name: str = "scenario"

    def __post_init__(self):
        if self.model in TWO_FLOWS and self.arrivals_b is None:
            raise ScenarioError(f"Model '{self.model.value}' requires 'arrivals_b'")
        if self.model not in TWO_FLOWS and self.arrivals_b is not None:
            raise ScenarioError(f"Model '{self.model.value}' takes no 'arrivals_b'")
        if self.model is not ModelKind.RANDOM_SERVICE and self.service_p != 1.0:
            raise ScenarioError("'service_p' only applies to the random_service model")
        if not 0.0 < self.service_p <= 1.0:
            raise ScenarioError(f"'service_p' must lie in (0, 1], got {self.service_p!r}")
        if not 1 <= self.order <= MAX_ORDER:
            raise ScenarioError(f"'order' must lie in [1, {MAX_ORDER}], got {self.order}")
        if self.r_max < 0 or self.r_max > self.order - TAIL_MARGIN:
            raise ScenarioError(f"'r_max' must lie in [0, order - {TAIL_MARGIN}] = "
                                f"[0, {self.order - TAIL_MARGIN}], got {self.r_max}")
        largest = max(d.degree for d in (self.arrivals, self.arrivals_b) if d is not None)
        if self.truncation < largest:
            raise ScenarioError(f"'truncation' ({self.truncation}) is below the largest "
                                f"arrival batch ({largest})")
        if not self.tol > 0.0:
            raise ScenarioError(f"'tol' must be positive, got {self.tol!r}")
        if self.max_iterations < 1:
            raise ScenarioError(f"'max_iterations' must be at least 1, got {self.max_iterations}")

    def check_oracle_bounds(self) -> None:
        """The oracle only reports tails up to its own truncation."""
        if self.r_max > self.truncation:
            raise ScenarioError(f"'r_max' ({self.r_max}) exceeds 'truncation' ({self.truncation})")

    @property
    def is_two_flow(self) -> bool:
        return self.model in TWO_FLOWS

    def to_model_spec(self) -> ModelSpec:
        return ModelSpec(self.model, self.arrivals, self.arrivals_b, self.service_p)


def _integer(doc: Mapping[str, Any], key: str) -> int:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"'{key}' must be an integer, got {value!r}")
    if isinstance(value, float):
        if not value.is_integer():
            raise ScenarioError(f"'{key}' must be an integer, got {value!r}")
        value = int(value)
    return value


def _real(doc: Mapping[str, Any], key: str) -> float:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def scenario_from_dict(doc: Dict[str, Any], defaults: Optional[Mapping[str, Any]] = None,
                       overrides: Optional[Mapping[str, Any]] = None,
                       name: str = "scenario") -> Scenario:
    """Build a Scenario from a parsed document.

    Args:
        doc: Scenario object
        defaults: Configured numerical defaults (lowest precedence)
        overrides: Flag values; None entries are ignored (highest precedence)
        name: Used when the document carries no 'name'

    Raises:
        ScenarioError: On missing, unknown or ill-typed fields
        InvalidProbability: On a malformed arrival distribution
    """
    if not isinstance(doc, dict):
        raise ScenarioError(f"Scenario must be a JSON object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(_MODEL_FIELDS) - set(NUMERIC_FIELDS))
    if unknown:
        raise ScenarioError(f"Unknown scenario field(s): {', '.join(unknown)}")

    merged: Dict[str, Any] = {k: v for k, v in (defaults or {}).items() if k in NUMERIC_FIELDS}
    merged.update({k: doc[k] for k in NUMERIC_FIELDS if k in doc})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None and k in NUMERIC_FIELDS})

    if "model" not in doc:
        raise ScenarioError("Scenario is missing 'model'")
    try:
        model = ModelKind(doc["model"])
    except ValueError:
        choices = ", ".join(k.value for k in ModelKind)
        raise ScenarioError(f"Unknown model {doc['model']!r}; expected one of {choices}") from None
    if "arrivals" not in doc:
        raise ScenarioError("Scenario is missing 'arrivals'")

    fields: Dict[str, Any] = {
        "model": model,
        "arrivals": from_json(doc["arrivals"]),
        "arrivals_b": from_json(doc["arrivals_b"]) if "arrivals_b" in doc else None,
        "name": str(doc.get("name", name)),
    }
    if "service_p" in doc:
        fields["service_p"] = _real(doc, "service_p")
    for key in NUMERIC_FIELDS:
        if key in merged:
            fields[key] = _real(merged, key) if key == "tol" else _integer(merged, key)
    return Scenario(**fields)


def load_scenario(source: str, defaults: Optional[Mapping[str, Any]] = None,
                  overrides: Optional[Mapping[str, Any]] = None) -> Scenario:
    """Read a scenario from a JSON file, or from standard input for '-'.

    Raises:
        OSError: If the file cannot be read
        ScenarioError: If the document is not valid JSON or fails validation
    """
    if source == STDIN:
        text, name = sys.stdin.read(), "stdin"
    else:
        path = Path(source)
        text, name = path.read_text(), path.stem
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: not valid JSON ({e})") from e
    scenario = scenario_from_dict(doc, defaults, overrides, name=name)
    logger.debug(f"Loaded scenario '{scenario.name}' ({scenario.model.value}) from {source}")
    return scenario
