import threading
import time

import numpy as np
import pytest

from editverify.providers import (
    CassetteStore,
    EmptyResponseError,
    LexicalJudge,
    LlmJudge,
    Provider,
    ProviderConfig,
    ReplayMissError,
    ScriptedTransport,
    TransportError,
    UnparseableReplyError,
    judge_feedback_overlap,
    judge_object_similarity,
    parse_yes_no,
    request_digest,
)
from tests.conftest import FakeTransport

CFG = ProviderConfig(provider_id="test", model_name="m1", max_retries=1, backoff_s=0.0)


def test_parse_yes_no():
    assert parse_yes_no("Yes") is True
    assert parse_yes_no("no") is False
    assert parse_yes_no("No.") is False
    assert parse_yes_no('"Yes!"') is True
    assert parse_yes_no("yes, the objects match") is True
    with pytest.raises(UnparseableReplyError):
        parse_yes_no("maybe")
    with pytest.raises(UnparseableReplyError):
        parse_yes_no("It depends")


def test_complete_requires_prompt():
    provider = Provider(CFG, transport=FakeTransport(["hi"]))
    with pytest.raises(ValueError):
        provider.complete("   ")


def test_live_call_passes_through():
    t = FakeTransport(["a wooden floor"])
    provider = Provider(CFG, transport=t)
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    assert provider.describe_image(img, "Describe this.") == "a wooden floor"
    assert t.calls[0][1] == 1  # one image attached


def test_empty_response_is_error():
    provider = Provider(CFG, transport=FakeTransport(["   "]))
    with pytest.raises(EmptyResponseError):
        provider.complete("Describe this.")


def test_transport_errors_retried_then_raise():
    calls = {"n": 0}

    def flaky(prompt, images):
        calls["n"] += 1
        raise TransportError("boom")

    provider = Provider(CFG, transport=FakeTransport(fn=flaky))
    with pytest.raises(TransportError):
        provider.complete("x")
    assert calls["n"] == CFG.max_retries + 1


def test_record_then_replay(tmp_path):
    t = FakeTransport(["first reply"])
    rec = Provider(CFG, transport=t, cassettes=CassetteStore(tmp_path), mode="record")
    assert rec.complete("hello") == "first reply"
    # Same request again: served from the cassette, no second network call.
    assert rec.complete("hello") == "first reply"
    assert len(t.calls) == 1

    replay = Provider(CFG, cassettes=CassetteStore(tmp_path), mode="replay")
    assert replay.complete("hello") == "first reply"
    with pytest.raises(ReplayMissError) as exc:
        replay.complete("other prompt")
    digest = request_digest("test", "m1", "other prompt", ())
    assert digest in str(exc.value)


def test_replay_determinism(tmp_path):
    store = CassetteStore(tmp_path)
    rec = Provider(CFG, transport=FakeTransport(["r1", "r2"]), cassettes=store, mode="record")
    rec.complete("p1")
    rec.complete("p2")
    outs = [
        (
            Provider(CFG, cassettes=CassetteStore(tmp_path), mode="replay").complete("p1"),
            Provider(CFG, cassettes=CassetteStore(tmp_path), mode="replay").complete("p2"),
        )
        for _ in range(3)
    ]
    assert outs[0] == outs[1] == outs[2] == ("r1", "r2")


def test_request_digests_distinct():
    prompts = [f"prompt {i}" for i in range(200)]
    digests = {request_digest("p", "m", p, ()) for p in prompts}
    assert len(digests) == len(prompts)
    assert request_digest("p", "m", "x", ("a",)) != request_digest("p", "m", "x", ("b",))


def test_max_parallel_gate():
    state = {"active": 0, "peak": 0}
    lock = threading.Lock()

    def slow(prompt, images):
        with lock:
            state["active"] += 1
            state["peak"] = max(state["peak"], state["active"])
        time.sleep(0.01)
        with lock:
            state["active"] -= 1
        return "ok"

    cfg = ProviderConfig(provider_id="test", model_name="m", max_parallel=2, backoff_s=0.0)
    provider = Provider(cfg, transport=FakeTransport(fn=slow))
    threads = [threading.Thread(target=provider.complete, args=(f"p{i}",)) for i in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert state["peak"] <= 2


def test_lexical_judge_similarity(lex):
    judge = LexicalJudge(lex)
    assert judge_object_similarity(judge, "blue vase", "brown vase").match
    assert judge_object_similarity(judge, "zorp", "zorp").match  # reflexive
    assert not judge_object_similarity(judge, "vase", "squirrel").match
    with pytest.raises(ValueError):
        judge_object_similarity(judge, "", "vase")


def test_lexical_judge_feedback_overlap(lex):
    judge = LexicalJudge(lex)
    yes = judge_feedback_overlap(
        judge, "the edges are blurry here", "a blurry smudge near the door"
    )
    assert yes.match  # shared Blur/Fuzziness category
    no = judge_feedback_overlap(judge, "the shadow is wrong", "it looks pixelated")
    assert not no.match
    assert judge_feedback_overlap(judge, "same words", "same words").match


def test_llm_judge_parses_strictly(lex):
    t = FakeTransport(["Yes", "maybe"])
    provider = Provider(CFG, transport=t)
    judge = LlmJudge(provider)
    assert judge.object_similarity("vase", "large vase").match
    with pytest.raises(UnparseableReplyError):
        judge.object_similarity("pig", "cloud")


def test_llm_judge_identity_short_circuits_and_caches():
    t = FakeTransport(["No"])
    judge = LlmJudge(Provider(CFG, transport=t))
    assert judge.object_similarity("vase", "vase").match  # no provider call
    assert not judge.object_similarity("vase", "cloud").match
    assert not judge.object_similarity("cloud", "vase").match  # cached, symmetric key
    assert len(t.calls) == 1


def test_scripted_transport_is_deterministic():
    t = ScriptedTransport()
    p = 'Is this right (Answer only Yes/No)?'
    assert t.send(p, []) == t.send(p, [])
    meta = t.send(
        'Respond with exactly these labeled lines\nINSTRUCTION: "remove the old table"', []
    )
    assert "ACTION: Remove" in meta


def test_http_transports_request_shape(monkeypatch):
    import httpx

    from editverify.providers import GeminiTransport, OpenAiChatTransport

    seen = {}

    class FakeResponse:
        def raise_for_status(self):
            return None

        def json(self):
            if "chat/completions" in seen["url"]:
                return {"choices": [{"message": {"content": "oai reply"}}]}
            return {"candidates": [{"content": {"parts": [{"text": "gem reply"}]}}]}

    def fake_post(url, json=None, headers=None, timeout=None):
        seen.update(url=url, json=json, headers=headers or {})
        return FakeResponse()

    monkeypatch.setattr(httpx, "post", fake_post)
    monkeypatch.setenv("FAKE_KEY", "secret")

    oai = OpenAiChatTransport(
        ProviderConfig(
            provider_id="openai", model_name="m", endpoint="https://x/v1", credential_env="FAKE_KEY"
        )
    )
    assert oai.send("hello", [b"png-bytes"]) == "oai reply"
    assert seen["url"].endswith("/chat/completions")
    assert seen["headers"]["Authorization"] == "Bearer secret"
    content = seen["json"]["messages"][0]["content"]
    assert content[0]["text"] == "hello" and content[1]["type"] == "image_url"

    gem = GeminiTransport(
        ProviderConfig(
            provider_id="gemini", model_name="g", endpoint="https://y/v1", credential_env="FAKE_KEY"
        )
    )
    assert gem.send("hi", []) == "gem reply"
    assert "generateContent" in seen["url"]


def test_http_transport_missing_credential():
    from editverify.providers import OpenAiChatTransport

    t = OpenAiChatTransport(
        ProviderConfig(
            provider_id="openai", model_name="m", endpoint="https://x", credential_env="MISSING_VAR_X"
        )
    )
    with pytest.raises(TransportError, match="MISSING_VAR_X"):
        t.send("x", [])
