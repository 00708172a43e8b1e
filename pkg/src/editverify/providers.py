"""Uniform access to hosted vision-language models with record/replay.

Every request is content-addressed by a digest of (provider id, model,
prompt, image digests); cassettes store one exchange per file under that
digest, which makes fixture sets mergeable and replay runs byte-stable.
Judges (LLM-backed or lexical) answer the pairwise similarity questions the
metrics depend on.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import re
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import httpx
import numpy as np
from PIL import Image

from . import lexicon as lex_mod
from .feedback import categorize_feedback

MODES = ("live", "record", "replay")


class ProviderError(Exception):
    """Base class for provider failures."""


class TransportError(ProviderError):
    """Network-level failure; retried with backoff."""


class ReplayMissError(ProviderError):
    """Replay-only mode and the cassette has no entry for the request."""


class EmptyResponseError(ProviderError):
    """The model returned an empty reply."""


class UnparseableReplyError(ProviderError):
    """A reply that must be Yes/No (or structured) could not be parsed."""


@dataclass(frozen=True)
class ProviderConfig:
    provider_id: str
    model_name: str
    endpoint: str = ""
    credential_env: str = ""
    max_parallel: int = 4
    timeout_s: float = 60.0
    max_retries: int = 2
    backoff_s: float = 0.5

    def __post_init__(self):
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


@dataclass(frozen=True)
class Exchange:
    request_digest: str
    prompt: str
    image_digests: tuple[str, ...]
    response_text: str
    provider_id: str
    model_name: str
    timestamp: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "request_digest": self.request_digest,
                "prompt": self.prompt,
                "image_digests": list(self.image_digests),
                "response_text": self.response_text,
                "provider_id": self.provider_id,
                "model_name": self.model_name,
                "timestamp": self.timestamp,
            },
            ensure_ascii=False,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Exchange":
        obj = json.loads(text)
        return cls(
            request_digest=obj["request_digest"],
            prompt=obj["prompt"],
            image_digests=tuple(obj["image_digests"]),
            response_text=obj["response_text"],
            provider_id=obj["provider_id"],
            model_name=obj["model_name"],
            timestamp=obj["timestamp"],
        )


def request_digest(
    provider_id: str, model_name: str, prompt: str, image_digests: tuple[str, ...]
) -> str:
    payload = json.dumps(
        {
            "provider_id": provider_id,
            "model_name": model_name,
            "prompt": prompt,
            "image_digests": list(image_digests),
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def encode_image(image) -> bytes:
    """Image (ndarray or raw bytes) -> PNG bytes for transport and digesting."""
    if isinstance(image, (bytes, bytearray)):
        return bytes(image)
    arr = np.asarray(image)
    if arr.dtype == bool:
        arr = np.where(arr, 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


class CassetteStore:
    """One exchange per file, named by request digest."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, digest: str) -> Path:
        return self.directory / f"{digest}.json"

    def get(self, digest: str) -> Exchange | None:
        path = self._path(digest)
        if not path.is_file():
            return None
        return Exchange.from_json(path.read_text(encoding="utf-8"))

    def put(self, exchange: Exchange) -> None:
        with self._write_lock:
            tmp = self._path(exchange.request_digest).with_suffix(".tmp")
            tmp.write_text(exchange.to_json(), encoding="utf-8")
            os.replace(tmp, self._path(exchange.request_digest))


def load_prompt(name: str) -> str:
    """Load a prompt template resource (without its trailing newline)."""
    text = resources.files("editverify").joinpath(f"prompts/{name}").read_text("utf-8")
    return text[:-1] if text.endswith("\n") else text


def prompt_digest(name: str) -> str:
    raw = resources.files("editverify").joinpath(f"prompts/{name}").read_bytes()
    return hashlib.sha256(raw).hexdigest()


class Provider:
    """A configured model endpoint with optional cassette recording.

    Thread-safe: live calls go through a bounded-parallelism gate and
    cassette writes are serialized.
    """

    def __init__(self, config: ProviderConfig, transport=None, cassettes=None, mode="live"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if mode in ("live", "record") and transport is None:
            transport = make_transport(config)
        if mode in ("record", "replay") and cassettes is None:
            raise ValueError(f"{mode} mode requires a cassette store")
        self.config = config
        self.transport = transport
        self.cassettes = cassettes
        self.mode = mode
        self._gate = threading.BoundedSemaphore(config.max_parallel)

    def complete(self, prompt: str, images=()) -> str:
        """Send a prompt (plus optional images) and return the reply text."""
        if not prompt or not prompt.strip():
            raise ValueError("prompt must be non-empty")
        blobs = [encode_image(im) for im in images]
        digests = tuple(hashlib.sha256(b).hexdigest() for b in blobs)
        digest = request_digest(
            self.config.provider_id, self.config.model_name, prompt, digests
        )

        if self.mode in ("record", "replay"):
            hit = self.cassettes.get(digest)
            if hit is not None:
                return hit.response_text
            if self.mode == "replay":
                raise ReplayMissError(f"no cassette for request {digest}")

        text = self._call_live(prompt, blobs)
        if self.mode == "record":
            self.cassettes.put(
                Exchange(
                    request_digest=digest,
                    prompt=prompt,
                    image_digests=digests,
                    response_text=text,
                    provider_id=self.config.provider_id,
                    model_name=self.config.model_name,
                    timestamp=time.time(),
                )
            )
        return text

    def describe_image(self, image, prompt: str) -> str:
        return self.complete(prompt, images=[image])

    def _call_live(self, prompt: str, blobs: list[bytes]) -> str:
        last_error = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(self.config.backoff_s * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    text = self.transport.send(prompt, blobs)
            except TransportError as exc:
                last_error = exc
                continue
            if not text or not text.strip():
                raise EmptyResponseError(
                    f"{self.config.provider_id} returned an empty reply"
                )
            return text
        raise TransportError(
            f"{self.config.provider_id} failed after "
            f"{self.config.max_retries + 1} attempts: {last_error}"
        )


class OpenAiChatTransport:
    """Chat-completions style HTTP adapter (OpenAI-compatible endpoints)."""

    def __init__(self, config: ProviderConfig):
        self.config = config

    def send(self, prompt: str, images: list[bytes]) -> str:
        key = os.environ.get(self.config.credential_env, "")
        if not key:
            raise TransportError(
                f"credential env var {self.config.credential_env!r} is not set"
            )
        content = [{"type": "text", "text": prompt}]
        for blob in images:
            import base64

            b64 = base64.b64encode(blob).decode("ascii")
            content.append(
                {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}}
            )
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": content}],
        }
        try:
            resp = httpx.post(
                self.config.endpoint.rstrip("/") + "/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {key}"},
                timeout=self.config.timeout_s,
            )
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"unexpected response shape: {exc}") from exc


class GeminiTransport:
    """generateContent style HTTP adapter."""

    def __init__(self, config: ProviderConfig):
        self.config = config

    def send(self, prompt: str, images: list[bytes]) -> str:
        key = os.environ.get(self.config.credential_env, "")
        if not key:
            raise TransportError(
                f"credential env var {self.config.credential_env!r} is not set"
            )
        import base64

        parts = [{"text": prompt}]
        for blob in images:
            parts.append(
                {
                    "inline_data": {
                        "mime_type": "image/png",
                        "data": base64.b64encode(blob).decode("ascii"),
                    }
                }
            )
        url = (
            self.config.endpoint.rstrip("/")
            + f"/models/{self.config.model_name}:generateContent?key={key}"
        )
        try:
            resp = httpx.post(
                url, json={"contents": [{"parts": parts}]}, timeout=self.config.timeout_s
            )
            resp.raise_for_status()
            data = resp.json()
            return data["candidates"][0]["content"]["parts"][0]["text"]
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"unexpected response shape: {exc}") from exc


_WORDLIST = (
    "table chair lamp window plant shelf wall door rug vase clock mirror "
    "bench fence tree flower rock bottle bowl basket box sign pole curtain"
).split()


class ScriptedTransport:
    """Deterministic local responder for offline runs and fixtures.

    Produces well-formed replies for every prompt family in this package,
    keyed only on the request content, so record/replay round trips are
    reproducible without network access.
    """

    def send(self, prompt: str, images: list[bytes]) -> str:
        seed = hashlib.sha256(
            prompt.encode("utf-8") + b"".join(hashlib.sha256(b).digest() for b in images)
        ).digest()

        if "Respond with exactly these labeled lines" in prompt:
            return self._metadata(prompt)
        if "one triplet per line" in prompt:
            return self._triplets(prompt)
        if "Rewrite the edit instruction and difference caption" in prompt:
            return self._reverse(prompt)
        if "does not appear in the scene object list" in prompt:
            return self._negative_object(prompt)
        if "different plausible value for the same attribute" in prompt:
            return "VALUE: green"
        if "deceptive instruction" in prompt:
            return self._negative_rewrite(prompt)
        if "Answer only Yes/No" in prompt or "Answer only Yes or No." in prompt:
            return "Yes" if seed[0] % 2 == 0 else "No"
        if prompt.startswith("Describe the contents of this image region"):
            a = _WORDLIST[seed[1] % len(_WORDLIST)]
            b = _WORDLIST[seed[2] % len(_WORDLIST)]
            return f"A {a} beside a {b}."
        if "describe all the differences" in prompt:
            return "The scene changed near the edited region."
        if "main difference between the two images" in prompt:
            return "The main object in the edited region changed."
        return f"ok:{seed.hex()[:12]}"

    @staticmethod
    def _field(prompt: str, label: str) -> str:
        m = re.search(rf'{label}: "(.*?)"', prompt, re.DOTALL)
        return m.group(1) if m else ""

    def _metadata(self, prompt: str) -> str:
        # The one-shot exemplar also contains INSTRUCTION:; the real input
        # is the last occurrence.
        matches = re.findall(r'INSTRUCTION: "(.*?)"', prompt)
        instruction = matches[-1] if matches else ""
        low = instruction.lower()
        words = re.findall(r"[a-z]+", low)
        content = [w for w in words if len(w) > 2][-2:] or ["object"]
        obj = " ".join(content[-1:])
        if any(w in words for w in ("remove", "delete", "erase")):
            action, source, target = "Remove", obj, "none"
        elif any(w in words for w in ("add", "insert", "put", "place")):
            action, source, target = "Add", "none", obj
        elif any(w in words for w in ("replace", "swap", "turn")):
            action, source, target = "Replace", f"original {obj}", obj
        else:
            action, source, target = "ChangeAttribute", f"plain {obj}", f"modified {obj}"
        return (
            f"ACTION: {action}\n"
            f"SOURCE_OBJECT: {source}\n"
            f"TARGET_OBJECT: {target}\n"
            f"SHORT_CAPTION: The {obj} was changed according to the instruction.\n"
            f"EXTENSIVE_CAPTION: The {obj} was changed according to the instruction. "
            f"No other differences are visible.\n"
            f"REVISED_INSTRUCTION: {instruction.capitalize()}\n"
            f"EXPLANATION: The edit follows the instruction."
        )

    def _triplets(self, prompt: str) -> str:
        caption = self._field(prompt, "CAPTION").lower()
        m = re.search(r"(?:a |an |the )?([a-z ]+?) was added", caption)
        if m:
            return f"add; none; {m.group(1).strip()}"
        m = re.search(r"(?:a |an |the )?([a-z ]+?) was (?:removed|deleted)", caption)
        if m:
            return f"remove; {m.group(1).strip()}; none"
        m = re.search(r"([a-z ]+?) was replaced (?:with|by) (?:a |an |the )?([a-z ]+)", caption)
        if m:
            return f"replace; {m.group(1).strip()}; {m.group(2).strip()}"
        if "no differences" in caption or not caption.strip():
            return "none"
        return "changeattribute; scene before; scene after"

    def _reverse(self, prompt: str) -> str:
        instruction = self._field(prompt, "ORIGINAL INSTRUCTION")
        caption = self._field(prompt, "ORIGINAL CAPTION")
        m = re.search(r"REVERSED ACTION: (\w+)", prompt)
        action = m.group(1) if m else "Replace"
        return (
            f"INSTRUCTION: Undo this edit: {instruction}\n"
            f"CAPTION: Reversed edit ({action}) of: {caption}"
        )

    def _negative_object(self, prompt: str) -> str:
        scene_line = re.search(r"SCENE OBJECTS: (.*)", prompt)
        scene = set(re.findall(r"[a-z]+", scene_line.group(1).lower())) if scene_line else set()
        target = self._field(prompt, "OBJECT").lower()
        for word in _WORDLIST:
            if word not in scene and word not in target:
                return f"OBJECT: {word}"
        return "OBJECT: artifact"

    def _negative_rewrite(self, prompt: str) -> str:
        deceptive = self._field(prompt, "DECEPTIVE OBJECT")
        m = re.search(r"ACTION: (\w+)", prompt)
        action = m.group(1) if m else "Add"
        verb = {"Add": "Add", "Remove": "Remove", "Replace": "Use", "ChangeAttribute": "Make"}[
            action
        ]
        return (
            f"INSTRUCTION: {verb} the {deceptive}\n"
            f"CAPTION: The edit involved the {deceptive}."
        )


def make_transport(config: ProviderConfig):
    pid = config.provider_id.lower()
    if pid.startswith("scripted"):
        return ScriptedTransport()
    if pid.startswith("gemini"):
        return GeminiTransport(config)
    return OpenAiChatTransport(config)


def build_provider(
    config: ProviderConfig, cassette_dir=None, mode="live", transport=None
) -> Provider:
    cassettes = CassetteStore(cassette_dir) if cassette_dir else None
    return Provider(config, transport=transport, cassettes=cassettes, mode=mode)


_YES_NO_RE = re.compile(r"^(yes|no)\b")


def parse_yes_no(text: str) -> bool:
    """Strict Yes/No reply parser.

    Accepts a case-insensitive leading yes/no after stripping punctuation
    and quotes; anything else raises — a silent default would bias metrics.
    """
    cleaned = text.strip().strip('"\'`*.!,:;()[]').strip().lower()
    m = _YES_NO_RE.match(cleaned)
    if not m:
        raise UnparseableReplyError(f"expected Yes/No, got {text!r}")
    return m.group(1) == "yes"


@dataclass(frozen=True)
class JudgeVerdict:
    match: bool
    raw_response: str
    judge_kind: str


def _norm_phrase(text: str) -> str:
    return " ".join(text.lower().split())


class _CachingJudge:
    """Shared verdict cache: DT matching re-asks the same pairs constantly."""

    kind = "?"

    def __init__(self):
        self._cache: dict[tuple, JudgeVerdict] = {}
        self._lock = threading.Lock()

    def _cached(self, method: str, a: str, b: str, compute) -> JudgeVerdict:
        if not a.strip() or not b.strip():
            raise ValueError(f"{method}: both texts must be non-empty")
        key = (method,) + tuple(sorted((_norm_phrase(a), _norm_phrase(b))))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        if _norm_phrase(a) == _norm_phrase(b):
            verdict = JudgeVerdict(True, "identical", self.kind)
        else:
            verdict = compute()
        with self._lock:
            self._cache[key] = verdict
        return verdict


class LexicalJudge(_CachingJudge):
    """Offline judge backed by the noun lexicon.

    Object similarity compares head nouns (attributes ignored); feedback
    overlap compares keyword categories; main-difference matching requires
    shared nouns or synonyms.
    """

    kind = "lexical"

    def __init__(self, lexicon: lex_mod.NounLexicon):
        super().__init__()
        self.lexicon = lexicon

    def object_similarity(self, a: str, b: str) -> JudgeVerdict:
        return self._cached(
            "object_similarity",
            a,
            b,
            lambda: JudgeVerdict(
                lex_mod.lexical_similar(a, b, self.lexicon), "lexical-head-match", self.kind
            ),
        )

    def feedback_overlap(self, a: str, b: str) -> JudgeVerdict:
        def compute():
            shared = categorize_feedback(a) & categorize_feedback(b)
            return JudgeVerdict(
                bool(shared),
                "categories: " + ", ".join(sorted(c.name for c in shared)),
                self.kind,
            )

        return self._cached("feedback_overlap", a, b, compute)

    def main_difference_match(self, a: str, b: str) -> JudgeVerdict:
        def compute():
            na = lex_mod.extract_nouns(a, self.lexicon)
            nb = lex_mod.extract_nouns(b, self.lexicon)
            overlap = lex_mod.noun_overlap(na, nb, self.lexicon)
            return JudgeVerdict(overlap > 0, f"shared nouns: {overlap}", self.kind)

        return self._cached("main_difference", a, b, compute)


class LlmJudge(_CachingJudge):
    """Judge that asks a hosted model strict Yes/No questions."""

    kind = "llm"

    _TEMPLATES = {
        "object_similarity": "judge_object_similarity.txt",
        "feedback_overlap": "judge_feedback_overlap.txt",
        "main_difference": "judge_main_difference.txt",
    }

    def __init__(self, provider: Provider):
        super().__init__()
        self.provider = provider
        self._prompts = {k: load_prompt(v) for k, v in self._TEMPLATES.items()}

    def _ask(self, method: str, a: str, b: str) -> JudgeVerdict:
        def compute():
            reply = self.provider.complete(self._prompts[method].format(a=a, b=b))
            return JudgeVerdict(parse_yes_no(reply), reply, self.kind)

        return self._cached(method, a, b, compute)

    def object_similarity(self, a: str, b: str) -> JudgeVerdict:
        return self._ask("object_similarity", a, b)

    def feedback_overlap(self, a: str, b: str) -> JudgeVerdict:
        return self._ask("feedback_overlap", a, b)

    def main_difference_match(self, a: str, b: str) -> JudgeVerdict:
        return self._ask("main_difference", a, b)


def judge_object_similarity(judge, a: str, b: str) -> JudgeVerdict:
    return judge.object_similarity(a, b)


def judge_feedback_overlap(judge, a: str, b: str) -> JudgeVerdict:
    return judge.feedback_overlap(a, b)
