"""Query-conditioned text generation with caching and an offline mode.

Ten generation subtasks, each a prompt template plus a token budget, feed
the expansion model. Completions come from a client with one capability,
``complete(request) -> text``; the HTTP client talks to a live endpoint
through an injectable transport, the fixture client reads previously
generated text from disk and performs no network activity at all.

Cache layout: ``<dir>/<query_id>/<subtask>.json`` per subtask and a
consolidated ``<dir>/<query_id>.json`` bundle. A cached subtask is reused
only when its stored params and template hash still match.
"""

import hashlib
import json
import logging
import os
import time
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .errors import ConfigError, FormatError, GenerationError

__all__ = [
    "ALL_SUBTASK_NAMES",
    "SUBTASK_MAX_TOKENS",
    "SubtaskSpec",
    "GenerationParams",
    "GenerationBundle",
    "CompletionRequest",
    "FixtureClient",
    "HttpCompletionClient",
    "subtask_specs",
    "render_prompt",
    "generate",
    "generate_bundle",
    "save_bundle",
    "load_bundle",
]

log = logging.getLogger(__name__)

_BUNDLE_FORMAT = "grf-bundle"
_BUNDLE_VERSION = 1

# token budgets per subtask; short list-style outputs get 64, reasoning and
# paragraph outputs 256, long-form documents 512
SUBTASK_MAX_TOKENS = {
    "keywords": 64,
    "entities": 64,
    "cot_keywords": 256,
    "cot_entities": 256,
    "queries": 256,
    "summary": 256,
    "facts": 256,
    "document": 512,
    "essay": 512,
    "news": 512,
}

ALL_SUBTASK_NAMES = tuple(SUBTASK_MAX_TOKENS)


@dataclass(frozen=True)
class SubtaskSpec:
    name: str
    max_tokens: int
    prompt_template: str

    def __post_init__(self):
        if self.name not in SUBTASK_MAX_TOKENS:
            raise ConfigError(
                f"unknown subtask {self.name!r}; valid: {', '.join(ALL_SUBTASK_NAMES)}"
            )
        if self.max_tokens < 1:
            raise ConfigError(f"max_tokens must be >= 1, got {self.max_tokens}")


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.7
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    model_id: str = ""


@dataclass
class GenerationBundle:
    query_id: str
    query_text: str
    generations: dict[str, str]
    params: GenerationParams
    created_at: str
    source: str
    failed: dict[str, str] = field(default_factory=dict)
    warnings: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CompletionRequest:
    """Everything a client may need: the prompt and budget for live
    completion, query/subtask identity for fixture lookup."""

    prompt: str
    max_tokens: int
    params: GenerationParams
    query_id: str
    subtask: str


def _default_template(name: str) -> str:
    text = resources.files("grf.data.prompts").joinpath(f"{name}.txt").read_text("utf-8")
    return text.rstrip("\n")


def subtask_specs(names=None, template_dir=None) -> list[SubtaskSpec]:
    """Specs for the requested subtasks (default: all ten, canonical order).
    ``template_dir`` overrides the bundled prompt templates per subtask."""
    if names is None:
        names = ALL_SUBTASK_NAMES
    specs = []
    for name in names:
        if name not in SUBTASK_MAX_TOKENS:
            raise ConfigError(
                f"unknown subtask {name!r}; valid: {', '.join(ALL_SUBTASK_NAMES)}"
            )
        if template_dir is not None:
            override = Path(template_dir) / f"{name}.txt"
            template = (
                override.read_text("utf-8").rstrip("\n")
                if override.exists()
                else _default_template(name)
            )
        else:
            template = _default_template(name)
        specs.append(
            SubtaskSpec(name=name, max_tokens=SUBTASK_MAX_TOKENS[name], prompt_template=template)
        )
    return specs


def render_prompt(spec: SubtaskSpec, query_text: str) -> str:
    """Substitute the query into the template literally (no re-interpretation
    of braces coming from the query itself)."""
    if not query_text.strip():
        raise ConfigError("empty query text")
    if spec.prompt_template.count("{query}") != 1:
        raise ConfigError(
            f"subtask {spec.name!r} template must contain {{query}} exactly once"
        )
    return spec.prompt_template.replace("{query}", query_text)


class FixtureClient:
    """Serves completions from a directory of previously generated text.
    Reads ``<root>/<query_id>/<subtask>.json`` and never touches the network."""

    source = "fixture"

    def __init__(self, root):
        self.root = Path(root)

    def complete(self, request: CompletionRequest) -> str:
        path = self.root / request.query_id / f"{request.subtask}.json"
        if not path.exists():
            raise GenerationError(
                f"no fixture for query {request.query_id!r} subtask {request.subtask!r}"
            )
        try:
            record = json.loads(path.read_text("utf-8"))
            return record["text"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise GenerationError(f"bad fixture file {path}: {exc}") from exc


def _urllib_transport(url: str, payload: bytes, headers: dict[str, str], timeout: float) -> bytes:
    request = urllib.request.Request(url, data=payload, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.read()
    except (urllib.error.URLError, OSError) as exc:
        raise GenerationError(f"transport failure: {exc}") from exc


class HttpCompletionClient:
    """Text-completion client for a JSON-over-HTTP endpoint.

    The transport is injectable for testing; retries are bounded with
    exponential backoff. The API key is read from an environment variable
    and never logged.
    """

    source = "live"

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "GRF_API_KEY",
        transport=None,
        sleep=time.sleep,
        max_attempts: int = 3,
        backoff: float = 1.0,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.transport = transport if transport is not None else _urllib_transport
        self.sleep = sleep
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.timeout = timeout

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, request: CompletionRequest) -> str:
        payload = json.dumps(
            {
                "model": request.params.model_id,
                "prompt": request.prompt,
                "max_tokens": request.max_tokens,
                "temperature": request.params.temperature,
                "top_p": request.params.top_p,
                "frequency_penalty": request.params.frequency_penalty,
                "presence_penalty": request.params.presence_penalty,
            }
        ).encode("utf-8")
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                raw = self.transport(self.endpoint, payload, self._headers(), self.timeout)
                return self._parse(raw)
            except GenerationError as exc:
                last_error = exc
                log.warning(
                    "completion attempt %d/%d failed for %s/%s: %s",
                    attempt + 1,
                    self.max_attempts,
                    request.query_id,
                    request.subtask,
                    exc,
                )
        raise GenerationError(
            f"completion failed after {self.max_attempts} attempts: {last_error}"
        )

    @staticmethod
    def _parse(raw: bytes) -> str:
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise GenerationError(f"unparseable completion response: {exc}") from exc
        try:
            choices = body["choices"]
            text = choices[0]["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GenerationError(f"unexpected completion response shape: {exc}") from exc
        return text if isinstance(text, str) else ""


def generate(client, spec: SubtaskSpec, query_text: str, params: GenerationParams, query_id: str = "") -> str:
    """One completion for one subtask. Empty completions are legal but
    logged, so downstream concatenation can flag them."""
    prompt = render_prompt(spec, query_text)
    text = client.complete(
        CompletionRequest(
            prompt=prompt,
            max_tokens=spec.max_tokens,
            params=params,
            query_id=query_id,
            subtask=spec.name,
        )
    )
    if not text.strip():
        log.warning("empty generation for query %r subtask %r", query_id, spec.name)
    return text


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _template_hash(template: str) -> str:
    return hashlib.sha256(template.encode("utf-8")).hexdigest()[:16]


def _atomic_write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2), "utf-8")
    os.replace(tmp, path)


def _params_to_dict(params: GenerationParams) -> dict:
    return asdict(params)


def _params_from_dict(raw) -> GenerationParams:
    if not isinstance(raw, dict):
        raise FormatError("missing or malformed params block")
    try:
        return GenerationParams(**raw)
    except TypeError as exc:
        raise FormatError(f"malformed params block: {exc}") from exc


def _load_cached_subtask(path: Path, spec: SubtaskSpec, params: GenerationParams):
    """Return (text, created_at) when the cache entry is valid for the
    current template and params, else None."""
    if not path.exists():
        return None
    try:
        record = json.loads(path.read_text("utf-8"))
        if record.get("params") != _params_to_dict(params):
            return None
        if record.get("template_hash") not in (None, _template_hash(spec.prompt_template)):
            return None
        return record["text"], record["created_at"]
    except (json.JSONDecodeError, KeyError, TypeError):
        return None


def generate_bundle(
    client,
    query_id: str,
    query_text: str,
    specs: list[SubtaskSpec] | None = None,
    params: GenerationParams | None = None,
    cache_dir=None,
) -> GenerationBundle:
    """Generate (or reuse from cache) every requested subtask.

    A hard-failing subtask is recorded in ``failed`` rather than aborting
    the bundle; the bundle is persisted before return either way.
    """
    if specs is None:
        specs = subtask_specs()
    if params is None:
        params = GenerationParams()
    cache = Path(cache_dir) if cache_dir is not None else None

    if cache is not None:
        bundle_path = cache / f"{query_id}.json"
        if bundle_path.exists():
            try:
                cached = load_bundle(bundle_path)
            except FormatError:
                cached = None
            if (
                cached is not None
                and cached.params == params
                and not cached.failed
                and all(s.name in cached.generations for s in specs)
            ):
                return cached

    generations: dict[str, str] = {}
    failed: dict[str, str] = {}
    warnings: dict[str, str] = {}
    for spec in specs:
        text = None
        created = None
        if cache is not None:
            hit = _load_cached_subtask(cache / query_id / f"{spec.name}.json", spec, params)
            if hit is not None:
                text, created = hit
        if text is None:
            try:
                text = generate(client, spec, query_text, params, query_id=query_id)
            except GenerationError as exc:
                failed[spec.name] = str(exc)
                continue
            created = _now()
            if cache is not None:
                _atomic_write_json(
                    cache / query_id / f"{spec.name}.json",
                    {
                        "text": text,
                        "params": _params_to_dict(params),
                        "created_at": created,
                        "template_hash": _template_hash(spec.prompt_template),
                    },
                )
        if not text.strip():
            warnings[spec.name] = "empty generation"
        generations[spec.name] = text

    bundle = GenerationBundle(
        query_id=query_id,
        query_text=query_text,
        generations=generations,
        params=params,
        created_at=_now(),
        source=getattr(client, "source", "live"),
        failed=failed,
        warnings=warnings,
    )
    if cache is not None:
        save_bundle(cache / f"{query_id}.json", bundle)
    return bundle


def save_bundle(path, bundle: GenerationBundle) -> None:
    _atomic_write_json(
        Path(path),
        {
            "format": _BUNDLE_FORMAT,
            "version": _BUNDLE_VERSION,
            "query_id": bundle.query_id,
            "query_text": bundle.query_text,
            "params": _params_to_dict(bundle.params),
            "created_at": bundle.created_at,
            "source": bundle.source,
            "generations": bundle.generations,
            "failed": bundle.failed,
            "warnings": bundle.warnings,
        },
    )


def load_bundle(path) -> GenerationBundle:
    try:
        payload = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read bundle {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != _BUNDLE_FORMAT:
        raise FormatError(f"{path} is not a generation bundle")
    if payload.get("version") != _BUNDLE_VERSION:
        raise FormatError(f"unsupported bundle version {payload.get('version')!r}")
    if "params" not in payload:
        raise FormatError(f"{path}: missing params block")
    generations = payload.get("generations")
    if not isinstance(generations, dict):
        raise FormatError(f"{path}: missing generations map")
    unknown = sorted(set(generations) - set(ALL_SUBTASK_NAMES))
    if unknown:
        raise FormatError(
            f"{path}: unknown subtask names {unknown}; valid: {', '.join(ALL_SUBTASK_NAMES)}"
        )
    return GenerationBundle(
        query_id=payload.get("query_id", ""),
        query_text=payload.get("query_text", ""),
        generations=generations,
        params=_params_from_dict(payload["params"]),
        created_at=payload.get("created_at", ""),
        source=payload.get("source", "fixture"),
        failed=payload.get("failed", {}),
        warnings=payload.get("warnings", {}),
    )
