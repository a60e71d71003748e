"""Continuous checking engine for Mini-Theory files."""

import json

from ._core import (
    PROTOCOL_VERSION,
    Error,
    FrameError,
    InvalidEdit,
    SchemaError,
    ScriptError,
    StyledText,
    check_text,
    complete,
    decode,
    encode,
    encode_glyphs,
    partition,
    replay,
    symbol_table,
    tokenize,
)
from . import _core

__all__ = [
    "PROTOCOL_VERSION",
    "Engine",
    "Error",
    "FrameError",
    "InvalidEdit",
    "SchemaError",
    "ScriptError",
    "StyledText",
    "check_text",
    "complete",
    "decode",
    "decode_frames",
    "encode",
    "encode_frame",
    "encode_glyphs",
    "insert",
    "partition",
    "remove",
    "replay",
    "symbol_table",
    "tokenize",
]


def insert(node, offset, text):
    return {"node": node, "kind": "insert", "offset": offset, "text": text}


def remove(node, offset, text):
    return {"node": node, "kind": "remove", "offset": offset, "text": text}


class Engine:
    """A live checker. Edits are dicts as built by insert() and remove()."""

    def __init__(self, workers=2, root=None):
        self._engine = _core.Engine(workers, None if root is None else str(root))

    def submit(self, edits):
        return self._engine.submit(json.dumps(list(edits)))

    def wait_quiescent(self, timeout=60.0):
        return self._engine.wait_quiescent(timeout)

    def trace(self):
        return self._engine.trace()

    def summary(self):
        return self._engine.summary()


def encode_frame(message):
    """Frames a message given as {"type", "seq", "payload"}."""
    return _core.encode_frame(json.dumps(message, ensure_ascii=False))


def decode_frames(data):
    """Returns (messages, rest_is_empty) for a byte string of frames."""
    bodies, idle = _core.decode_frames(data)
    return [json.loads(b) for b in bodies], idle
