"""Iterative refinement of a schematic by a vision-language backend."""

from __future__ import annotations

from .backends import API_KEY_ENV, Backend, HttpBackend, MockBackend, ScriptExhausted
from .loop import (AgentConfig, AgentTranscript, IterationRecord, Status, make_backend, run_loop,
                   run_placement_loop, run_wiring_loop)
from .prompt import Prompt, build_prompt, describe_circuit, history_window
from .protocol import (BackendError, BackendRequest, BackendResponse, Decision, Image, Phase, Step,
                       parse_decision, parse_revision)


__all__ = [
    "API_KEY_ENV", "AgentConfig", "AgentTranscript", "Backend", "BackendError", "BackendRequest",
    "BackendResponse", "Decision", "HttpBackend", "Image", "IterationRecord", "MockBackend", "Phase",
    "Prompt", "ScriptExhausted", "Status", "Step", "build_prompt", "describe_circuit", "history_window",
    "make_backend", "parse_decision", "parse_revision", "run_loop", "run_placement_loop",
    "run_wiring_loop",
]
