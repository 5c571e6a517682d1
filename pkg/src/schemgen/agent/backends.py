"""Backends turn a :class:`BackendRequest` into raw reply text.

``MockBackend`` is fully deterministic and needs no network; it either
follows a script of decisions or, without one, makes seeded random choices.
``HttpBackend`` posts the prompt and images to a multimodal endpoint.
"""

from __future__ import annotations

import os
import random
from dataclasses import replace
from typing import Protocol, Sequence

from ..evaluation import check_correctness
from ..netlist import NetlistError, parse_netlist
from ..placement import SchematicLayout, write_layout
from .prompt import build_prompt
from .protocol import BackendError, BackendRequest, Phase, Step

API_KEY_ENV = "EESCHEMATIC_API_KEY"


class ScriptExhausted(BackendError):
    pass


class Backend(Protocol):
    name: str

    def complete(self, request: BackendRequest) -> str: ...


def _fenced(reasoning: str, layout: SchematicLayout) -> str:
    return f"REASONING: {reasoning}\n```json\n{write_layout(layout).decode()}```\n"


def nudge(layout: SchematicLayout, cid: str, dx: int, dy: int) -> SchematicLayout:
    comps = tuple(replace(c, x=c.x + dx, y=c.y + dy) if c.id == cid else c for c in layout.components)
    return replace(layout, components=comps)


class MockBackend:
    """Scripted or seeded stand-in for a vision-language model.

    Script entries are ``ACCEPT``, ``MODIFY`` or ``MODIFY:<edit>``, consumed
    one per decide call.  Edits: ``noop``; ``nudge:<id>:<dx>:<dy>``;
    ``garbage`` (never a valid layout); ``garbage1`` (invalid once, then a
    valid no-op on the repair attempt).  Any other label means a seeded
    random edit suited to the phase.
    """

    name = "mock"

    def __init__(self, script: Sequence[str] | None = None, seed: int = 0, accept_prob: float = 0.3):
        self.script = list(script) if script is not None else None
        self.seed = seed
        self.accept_prob = accept_prob
        self._pos = 0
        self._edit = "auto"
        self.calls: list[BackendRequest] = []

    def complete(self, request: BackendRequest) -> str:
        self.calls.append(request)
        if request.step is Step.DECIDE:
            return self._decide(request)
        return self._revise(request)

    def _rng(self, req: BackendRequest, what: str) -> random.Random:
        return random.Random(f"{self.seed}:{req.phase.value}:{req.iteration}:{what}")

    def _violations(self, req: BackendRequest) -> int | None:
        try:
            c = parse_netlist(req.netlist_text)
        except NetlistError:
            return None
        return check_correctness(c, req.layout).violation_count

    def _decide(self, req: BackendRequest) -> str:
        if self.script is not None:
            if self._pos >= len(self.script):
                raise ScriptExhausted(f"mock script exhausted after {self._pos} decisions")
            entry = self.script[self._pos]
            self._pos += 1
            head, _, edit = entry.partition(":")
            head = head.strip().upper()
            if head not in ("ACCEPT", "MODIFY"):
                raise BackendError(f"bad mock script entry {entry!r}")
            self._edit = edit or "auto"
            return f"DECISION: {head}\nREASONING: scripted step {self._pos}.\n"
        bad = self._violations(req)
        accept = bad == 0 and self._rng(req, "decide").random() < self.accept_prob
        self._edit = "auto"
        if accept:
            return "DECISION: ACCEPT\nREASONING: layout is clean and readable.\n"
        why = f"{bad} rule violations remain" if bad else "spacing and alignment could be tighter"
        return f"DECISION: MODIFY\nREASONING: {why}.\n"

    def _revise(self, req: BackendRequest) -> str:
        edit = self._edit
        if edit == "garbage" or (edit == "garbage1" and req.repair_error is None):
            return "REASONING: here you go\n```json\n{\"grid\": \n```\n"
        if edit in ("noop", "garbage1"):
            return _fenced("keeping the layout as it is", req.layout)
        if edit.startswith("nudge:"):
            try:
                _, cid, dx, dy = edit.split(":")
                return _fenced(f"move {cid}", nudge(req.layout, cid, int(dx), int(dy)))
            except ValueError:
                raise BackendError(f"bad nudge edit {edit!r}") from None
        return self._random_edit(req)

    def _random_edit(self, req: BackendRequest) -> str:
        rng = self._rng(req, "revise")
        layout = req.layout
        if req.phase is Phase.WIRING:
            if not layout.wires:
                return _fenced("nothing to change", layout)
            i = rng.randrange(len(layout.wires))
            wires = list(layout.wires)
            wires[i] = replace(wires[i], points=tuple(reversed(wires[i].points)))
            rng.shuffle(wires)
            return _fenced(f"redraw the {wires[0].net} wire", replace(layout, wires=tuple(wires)))
        devs = sorted((c for c in layout.components if not c.id.startswith("PORT_")), key=lambda c: c.id)
        if not devs:
            return _fenced("nothing to move", layout)
        comp = devs[rng.randrange(len(devs))]
        w, h = comp.size
        step = rng.choice((-2, -1, 1, 2))
        dx, dy = (step, 0) if rng.random() < 0.5 else (0, step)
        dx = max(-comp.x, min(dx, layout.width - w - comp.x))
        dy = max(-comp.y, min(dy, layout.height - h - comp.y))
        return _fenced(f"shift {comp.id} by ({dx}, {dy})", nudge(layout, comp.id, dx, dy))


class HttpBackend:
    """POST the prompt text plus SVG images as multipart form data.

    The endpoint replies with plain text or with JSON carrying a ``text``
    field.  The API key is only ever read from the environment.
    """

    name = "http"

    def __init__(self, url: str, model: str = "", timeout: float = 60.0, session=None):
        if not url:
            raise BackendError("http backend needs a URL")
        self.url = url
        self.model = model
        self.timeout = timeout
        if session is None:
            import requests
            session = requests.Session()
        self.session = session

    def complete(self, request: BackendRequest) -> str:
        import requests

        prompt = build_prompt(request)
        files = [("images", (f"{im.label}.svg", im.svg.encode("utf-8"), "image/svg+xml"))
                 for im in request.all_images]
        data = {"model": self.model, "prompt": prompt.text, "phase": request.phase.value,
                "step": request.step.value}
        headers = {}
        key = os.environ.get(API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = self.session.post(self.url, data=data, files=files, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
        except requests.RequestException as e:
            raise BackendError(f"{type(e).__name__} talking to {self.url}") from None
        if "json" in resp.headers.get("Content-Type", ""):
            try:
                text = resp.json()["text"]
            except (ValueError, KeyError, TypeError):
                raise BackendError("JSON reply without a 'text' field") from None
            if not isinstance(text, str):
                raise BackendError("JSON reply 'text' is not a string")
            return text
        return resp.text
