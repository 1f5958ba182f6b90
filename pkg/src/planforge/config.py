"""Service configuration: JSON file plus environment overrides.

Example config:

    {
      "listen_port": 8080,
      "data_dir": "./data",
      "default_model_id": "mock",
      "seed_policy": 42,
      "fixture_path": "./fixtures.json",
      "providers": [
        {"model_id": "mock", "kind": "mock", "fixtures": "./fixtures.json"},
        {"model_id": "remote", "kind": "http", "endpoint": "https://...",
         "model": "some-chat-model", "api_key_env": "REMOTE_API_KEY"}
      ]
    }

``seed_policy`` is either a fixed integer (every session gets that seed) or
the string "per-request" (callers supply seeds; sessions default to 0).
``PLANFORGE_PORT`` and ``PLANFORGE_DATA_DIR`` override the file values.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .gateway import Gateway, HttpChatProvider, MockProvider

PER_REQUEST = "per-request"

ENV_PORT = "PLANFORGE_PORT"
ENV_DATA_DIR = "PLANFORGE_DATA_DIR"


@dataclass
class ProviderConfig:
    model_id: str
    kind: str  # mock | http
    fixtures: str | None = None
    endpoint: str | None = None
    model: str | None = None
    api_key_env: str | None = None


@dataclass
class ServiceConfig:
    listen_port: int = 8080
    data_dir: Path = Path("./data")
    default_model_id: str = "mock"
    seed_policy: int | str = 0
    fixture_path: Path | None = None
    providers: list[ProviderConfig] = field(default_factory=list)
    static_dir: Path | None = None  # serve the built frontend from here, if set

    def __post_init__(self):
        if not 1 <= self.listen_port <= 65535:
            raise ConfigError(f"listen_port {self.listen_port} outside 1..65535")
        if self.seed_policy != PER_REQUEST and not isinstance(self.seed_policy, int):
            raise ConfigError("seed_policy must be an integer or 'per-request'")

    @property
    def fixed_seed(self) -> int:
        return self.seed_policy if isinstance(self.seed_policy, int) else 0


def load_config(path: str | Path | None = None) -> ServiceConfig:
    raw: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc

    providers = [
        ProviderConfig(
            model_id=p["model_id"],
            kind=p.get("kind", "mock"),
            fixtures=p.get("fixtures"),
            endpoint=p.get("endpoint"),
            model=p.get("model"),
            api_key_env=p.get("api_key_env"),
        )
        for p in raw.get("providers", [])
    ]

    port = int(os.environ.get(ENV_PORT, raw.get("listen_port", 8080)))
    data_dir = Path(os.environ.get(ENV_DATA_DIR, raw.get("data_dir", "./data")))
    return ServiceConfig(
        listen_port=port,
        data_dir=data_dir,
        default_model_id=raw.get("default_model_id", "mock"),
        seed_policy=raw.get("seed_policy", 0),
        fixture_path=Path(raw["fixture_path"]) if raw.get("fixture_path") else None,
        providers=providers,
        static_dir=Path(raw["static_dir"]) if raw.get("static_dir") else None,
    )


def build_gateway(config: ServiceConfig) -> Gateway:
    """Register configured providers; a mock is always available as fallback."""
    gateway = Gateway()
    for provider in config.providers:
        if provider.kind == "mock":
            mock = (
                MockProvider.from_fixture_file(provider.fixtures)
                if provider.fixtures
                else MockProvider()
            )
            gateway.register_provider(provider.model_id, mock)
        elif provider.kind == "http":
            if not provider.endpoint or not provider.model:
                raise ConfigError(f"http provider '{provider.model_id}' needs endpoint and model")
            api_key = os.environ.get(provider.api_key_env) if provider.api_key_env else None
            gateway.register_provider(
                provider.model_id,
                HttpChatProvider(
                    name=provider.model_id,
                    endpoint=provider.endpoint,
                    model=provider.model,
                    api_key=api_key,
                ),
            )
        else:
            raise ConfigError(f"unknown provider kind '{provider.kind}'")
    if not any(p.model_id == "mock" for p in config.providers):
        mock = (
            MockProvider.from_fixture_file(config.fixture_path)
            if config.fixture_path
            else MockProvider()
        )
        gateway.register_provider("mock", mock)
    return gateway
