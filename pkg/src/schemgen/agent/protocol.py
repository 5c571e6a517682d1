"""Request/response types exchanged with a vision-language backend, and the
text protocol used to parse what comes back."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field

from ..placement import SchemaError, SchematicLayout, layout_from_obj


class Phase(str, enum.Enum):
    PLACEMENT = "placement"
    WIRING = "wiring"


class Step(str, enum.Enum):
    DECIDE = "decide"
    REVISE = "revise"


class Decision(str, enum.Enum):
    ACCEPT = "ACCEPT"
    MODIFY = "MODIFY"


class BackendError(RuntimeError):
    """Transport failure, timeout, or a reply that breaks the protocol."""


@dataclass(frozen=True)
class Image:
    label: str
    svg: str


@dataclass(frozen=True)
class BackendRequest:
    phase: Phase
    step: Step
    iteration: int
    images: tuple[Image, ...]
    layout: SchematicLayout
    netlist_text: str
    description_text: str
    examples: tuple[str, ...]
    reference_good: tuple[Image, str]
    reference_bad: tuple[Image, str]
    history_digest: tuple[str, ...] = ()
    decide_reasoning: str | None = None
    repair_error: str | None = None

    def __post_init__(self):
        if not self.images or self.images[0].label != "current":
            raise ValueError("the first image must be the current rendering")
        for img, caption in (self.reference_good, self.reference_bad):
            if not isinstance(img, Image) or not caption:
                raise ValueError("references must be (image, caption) pairs")
        if self.step is Step.REVISE and not self.decide_reasoning:
            raise ValueError("a revise request must carry the decide reasoning")

    @property
    def all_images(self) -> tuple[Image, ...]:
        return self.images + (self.reference_good[0], self.reference_bad[0])


@dataclass(frozen=True)
class BackendResponse:
    decision: Decision | None
    reasoning: str
    revised_layout: SchematicLayout | None = None
    raw: str = field(default="", repr=False)


_DECISION = re.compile(r"DECISION\s*:\s*(ACCEPT|MODIFY)\b", re.IGNORECASE)
_REASONING = re.compile(r"REASONING\s*:\s*(.*)", re.IGNORECASE | re.DOTALL)
_FENCE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def _reasoning(text: str) -> str:
    m = _REASONING.search(text)
    body = m.group(1) if m else text
    return _FENCE.sub("", body).strip()


def parse_decision(text: str) -> BackendResponse:
    m = _DECISION.search(text)
    if not m:
        raise BackendError("reply has no DECISION: ACCEPT|MODIFY line")
    return BackendResponse(Decision(m.group(1).upper()), _reasoning(text[m.end():] or text), raw=text)


def parse_revision(text: str) -> BackendResponse:
    """Extract the fenced JSON layout; schema problems raise SchemaError."""
    m = _FENCE.search(text)
    if not m:
        raise SchemaError("/", "reply has no fenced JSON layout")
    try:
        doc = json.loads(m.group(1))
    except json.JSONDecodeError as e:
        raise SchemaError("/", f"invalid JSON: {e.msg} at line {e.lineno}") from None
    layout = layout_from_obj(doc)
    return BackendResponse(None, _reasoning(text[:m.start()]), layout, raw=text)
