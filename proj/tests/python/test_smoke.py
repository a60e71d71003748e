import os
import pathlib

import pytest

import minipide

FIXTURES = pathlib.Path(os.environ.get("MINIPIDE_FIXTURES", pathlib.Path(__file__).parent.parent / "fixtures"))


def test_tokenize_and_partition():
    kinds = [t[0] for t in minipide.tokenize("def x = 1")]
    assert kinds[0] == "keyword"
    assert len(kinds) == 7

    spans, messages = minipide.partition("garbage def x = 1")
    assert [s["keyword"] for s in spans] == ["<malformed>", "def"]
    assert "".join(s["text"] for s in spans) == "garbage def x = 1"
    assert len(messages) == 1


def test_symbols():
    styled = minipide.decode("\\<forall>x")
    assert styled.text == "∀x"
    assert minipide.encode(styled) == "\\<forall>x"
    assert minipide.encode_glyphs("∀") == "\\<forall>"
    sub = minipide.decode("A\\<^sub>1")
    assert sub.text == "A1"
    assert (1, 2, "sub") in sub.styles
    assert ("\\<forall>", "\\<forall> ∀") in minipide.complete("\\<for")


def test_check_text():
    ok = minipide.check_text("lemma t: 1 + 1 = 2")
    assert ok["status"] == "finished"
    bad = minipide.check_text("eval y")
    assert bad["status"] == "failed"
    assert bad["messages"][0]["severity"] == "error"


def test_engine():
    engine = minipide.Engine(workers=2)
    engine.submit([minipide.insert("A.mthy", 0, "def x = 1\neval x\n")])
    assert engine.wait_quiescent(10)
    trace = engine.trace()
    assert trace.startswith("node A.mthy\n")
    assert 'use_site="x"->A.mthy@4' in trace
    assert engine.summary()["session"]["finished"] == 2

    with pytest.raises(minipide.InvalidEdit):
        engine.submit([minipide.remove("A.mthy", 0, "nope")])


def test_replay_modes_agree():
    script = FIXTURES / "scripts" / "typing.json"
    inc = minipide.replay(str(script), "incremental")
    assert inc == minipide.replay(str(script), "batch")
    assert inc


def test_frames():
    message = {"type": "completion_request", "seq": 3, "payload": {"prefix": "\\<for"}}
    data = minipide.encode_frame(message)
    assert data[:4] == (len(data) - 4).to_bytes(4, "big")
    decoded, idle = minipide.decode_frames(data + data)
    assert decoded == [message, message]
    assert idle
    with pytest.raises(minipide.SchemaError):
        minipide.encode_frame({"type": "node_edits", "seq": 1, "payload": {}})
