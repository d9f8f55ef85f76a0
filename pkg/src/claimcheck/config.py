"""Run configuration: one declarative YAML file, env overrides, flag overrides.

Precedence is flags > environment variables > config file > built-in
defaults. Secrets can be given literally (``api_key``) or by naming an
environment variable (``api_key_env``).
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import yaml

from .actions import ALL_VARIANTS
from .claims import get_taxonomy
from .llm import LlmClient, ModelConfig, load_templates
from .netutil import resolve_api_key
from .pipeline import FactChecker, PipelineConfig
from .replay import Cassette, REPLAY_STRICT
from .tools import (
    EmbedClient,
    GeoClient,
    KnowledgeBase,
    ScrapeClient,
    SearchClient,
    ToolSet,
    VisionClient,
    default_policy,
)

DEFAULTS = {
    "llm": {
        "endpoint": "",
        "model": "",
        "api_key": None,
        "api_key_env": "LLM_API_KEY",
        "temperature": 0.01,
        "top_p": 0.9,
        "max_context": 128000,
        "max_output": 2048,
        "requests_per_minute": 0,
    },
    "search": {"endpoint": "", "api_key": None, "api_key_env": "SEARCH_API_KEY", "depth": 10},
    "vision": {"endpoint": "", "api_key": None, "api_key_env": "VISION_API_KEY"},
    "geolocation": {"endpoint": "", "api_key": None, "api_key_env": "GEO_API_KEY", "top_k": 5},
    "scraper": {"endpoint": "", "api_key": None, "api_key_env": "SCRAPER_API_KEY"},
    "embedder": {"endpoint": "", "model": "", "api_key": None, "api_key_env": "EMBED_API_KEY"},
    "kb": {"path": None},
    "pipeline": {
        "taxonomy": "claimreview",
        "max_iterations": 3,
        "actions_per_iteration": 5,
        "temporal_filtering": True,
        "tools": list(ALL_VARIANTS),
        "extra_rules": "",
        "extra_rules_file": None,
        "snapshot_budget": 8000,
        "no_planning": False,
        "no_develop": False,
        "unimodal_develop": False,
    },
    "paths": {"prompt_dir": None, "excluded_domains": None, "unsupported_domains": None},
    "replay": {"cassette": None, "mode": REPLAY_STRICT},
}

# documented environment overrides (names kept short and predictable)
ENV_OVERRIDES = {
    "CLAIMCHECK_LLM_ENDPOINT": ("llm", "endpoint"),
    "CLAIMCHECK_LLM_MODEL": ("llm", "model"),
    "CLAIMCHECK_LLM_API_KEY": ("llm", "api_key"),
    "CLAIMCHECK_SEARCH_ENDPOINT": ("search", "endpoint"),
    "CLAIMCHECK_SEARCH_API_KEY": ("search", "api_key"),
    "CLAIMCHECK_SCRAPER_ENDPOINT": ("scraper", "endpoint"),
    "CLAIMCHECK_VISION_ENDPOINT": ("vision", "endpoint"),
    "CLAIMCHECK_GEO_ENDPOINT": ("geolocation", "endpoint"),
    "CLAIMCHECK_EMBED_ENDPOINT": ("embedder", "endpoint"),
    "CLAIMCHECK_TAXONOMY": ("pipeline", "taxonomy"),
    "CLAIMCHECK_CASSETTE": ("replay", "cassette"),
    "CLAIMCHECK_REPLAY_MODE": ("replay", "mode"),
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class RunConfig:
    """Resolved configuration for one invocation."""

    def __init__(self, data: dict):
        self.data = data

    @classmethod
    def load(
        cls,
        config_path: str | Path | None = None,
        flag_overrides: dict | None = None,
        env: dict | None = None,
    ) -> "RunConfig":
        env = env if env is not None else os.environ
        data = json.loads(json.dumps(DEFAULTS))  # deep copy
        if config_path is not None:
            loaded = yaml.safe_load(Path(config_path).read_text(encoding="utf-8")) or {}
            if not isinstance(loaded, dict):
                raise ValueError(f"config file {config_path} must hold a mapping")
            data = _deep_merge(data, loaded)
        for env_name, (section, key) in ENV_OVERRIDES.items():
            if env_name in env and env[env_name] != "":
                data[section][key] = env[env_name]
        if flag_overrides:
            data = _deep_merge(data, flag_overrides)
        return cls(data)

    def section(self, name: str) -> dict:
        return self.data.get(name, {})

    def digest(self) -> str:
        """Config fingerprint for metrics files; secrets are excluded."""
        scrubbed = json.loads(json.dumps(self.data))
        for section in scrubbed.values():
            if isinstance(section, dict):
                section.pop("api_key", None)
        return hashlib.sha256(
            json.dumps(scrubbed, sort_keys=True).encode("utf-8")
        ).hexdigest()[:16]

    # --- builders ---

    def build_cassette(self) -> Cassette | None:
        replay = self.section("replay")
        if not replay.get("cassette"):
            return None
        return Cassette(replay["cassette"], mode=replay.get("mode", REPLAY_STRICT))

    def build_llm(self, cassette: Cassette | None) -> LlmClient:
        llm = self.section("llm")
        model_config = ModelConfig(
            endpoint=llm.get("endpoint", ""),
            model_id=llm.get("model", ""),
            api_key=resolve_api_key(llm.get("api_key"), llm.get("api_key_env")),
            temperature=float(llm.get("temperature", 0.01)),
            top_p=float(llm.get("top_p", 0.9)),
            max_context=int(llm.get("max_context", 128000)),
            max_output=int(llm.get("max_output", 2048)),
            requests_per_minute=int(llm.get("requests_per_minute", 0)),
        )
        return LlmClient(model_config, cassette=cassette)

    def build_pipeline_config(self) -> PipelineConfig:
        p = self.section("pipeline")
        extra_rules = p.get("extra_rules") or ""
        if p.get("extra_rules_file"):
            extra_rules = Path(p["extra_rules_file"]).read_text(encoding="utf-8")
        return PipelineConfig(
            taxonomy=get_taxonomy(p.get("taxonomy", "claimreview")),
            max_iterations=int(p.get("max_iterations", 3)),
            actions_per_iteration=int(p.get("actions_per_iteration", 5)),
            extra_rules=extra_rules,
            enabled_tools=tuple(p.get("tools", list(ALL_VARIANTS))),
            temporal_filtering=bool(p.get("temporal_filtering", True)),
            snapshot_budget=int(p.get("snapshot_budget", 8000)),
            no_planning=bool(p.get("no_planning", False)),
            no_develop=bool(p.get("no_develop", False)),
            unimodal_develop=bool(p.get("unimodal_develop", False)),
        )

    def build_toolset_factory(self, cassette: Cassette | None):
        """A factory binding shared tool clients to per-run registries."""
        paths = self.section("paths")
        policy = default_policy(
            excluded_path=paths.get("excluded_domains"),
            unsupported_path=paths.get("unsupported_domains"),
        )
        search_cfg = self.section("search")
        search = (
            SearchClient(
                search_cfg["endpoint"],
                api_key=resolve_api_key(search_cfg.get("api_key"), search_cfg.get("api_key_env")),
                cassette=cassette,
                depth=int(search_cfg.get("depth", 10)),
            )
            if search_cfg.get("endpoint")
            else None
        )
        vision_cfg = self.section("vision")
        vision = (
            VisionClient(
                vision_cfg["endpoint"],
                api_key=resolve_api_key(vision_cfg.get("api_key"), vision_cfg.get("api_key_env")),
                cassette=cassette,
            )
            if vision_cfg.get("endpoint")
            else None
        )
        geo_cfg = self.section("geolocation")
        geo = (
            GeoClient(
                geo_cfg["endpoint"],
                api_key=resolve_api_key(geo_cfg.get("api_key"), geo_cfg.get("api_key_env")),
                cassette=cassette,
                top_k=int(geo_cfg.get("top_k", 5)),
            )
            if geo_cfg.get("endpoint")
            else None
        )
        scraper_cfg = self.section("scraper")
        scraper = (
            ScrapeClient(
                scraper_cfg["endpoint"],
                api_key=resolve_api_key(
                    scraper_cfg.get("api_key"), scraper_cfg.get("api_key_env")
                ),
                cassette=cassette,
            )
            if scraper_cfg.get("endpoint")
            else None
        )
        kb_cfg = self.section("kb")
        kb = KnowledgeBase.load(kb_cfg["path"]) if kb_cfg.get("path") else None
        embed_cfg = self.section("embedder")
        embedder = (
            EmbedClient(
                embed_cfg["endpoint"],
                model_id=embed_cfg.get("model", ""),
                api_key=resolve_api_key(embed_cfg.get("api_key"), embed_cfg.get("api_key_env")),
                cassette=cassette,
            )
            if embed_cfg.get("endpoint")
            else None
        )

        def factory(registry, counters) -> ToolSet:
            return ToolSet(
                registry=registry,
                policy=policy,
                search=search,
                vision=vision,
                geo=geo,
                scraper=scraper,
                kb=kb,
                kb_embedder=embedder.embed_one if embedder is not None else None,
                counters=counters,
            )

        return factory

    def build_embedder(self, cassette: Cassette | None) -> EmbedClient:
        embed_cfg = self.section("embedder")
        if not embed_cfg.get("endpoint"):
            raise ValueError("embedder.endpoint is not configured")
        return EmbedClient(
            embed_cfg["endpoint"],
            model_id=embed_cfg.get("model", ""),
            api_key=resolve_api_key(embed_cfg.get("api_key"), embed_cfg.get("api_key_env")),
            cassette=cassette,
        )

    def build_fact_checker(self, cassette: Cassette | None = None) -> FactChecker:
        prompt_dir = self.section("paths").get("prompt_dir")
        return FactChecker(
            llm=self.build_llm(cassette),
            toolset_factory=self.build_toolset_factory(cassette),
            config=self.build_pipeline_config(),
            templates=load_templates(prompt_dir),
        )
