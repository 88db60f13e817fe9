"""Run configuration files and tool construction.

A run config is an INI-style text file. Campaign settings are flat
``key = value`` lines at the top; tool choices live in a ``[tools]``
section::

    product = Sony medical insurance
    horizon_T = 3
    per_step_n = 18
    variant = full_adaptive
    dataset = dataset.csv
    output = report.json

    [tools]
    model = mock:chat_script.json
    search = fixture:search_corpus.json
    embedder = hash

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional

from .domain import CampaignConfig, PolicyVariant
from .errors import ValidationError
from .memory import MemoryStore
from .orchestrator import Toolbox
from .simulator import ReplayKpiSource, load_dataset
from .tools import CatalogChatModel, FixtureSearch, HashEmbedder, ScriptedChatModel
from .tools.embedding import DEFAULT_DIM
from .tools.remote import RemoteChatModel, RemoteEmbedder, RemoteSearch

TOP = "campaign"
INT_FIELDS = ("horizon_T", "per_step_n", "initial_count", "retry_limit", "seed", "memory_k", "search_results")
KNOWN_TOP = set(INT_FIELDS) | {
    "product", "kpi_metric", "temperature", "variant", "ratio", "dataset", "product_filter",
    "memory_snapshot", "output", "kpi_noise",
}
KNOWN_TOOLS = {"model", "search", "embedder", "embed_dim", "chat_url", "chat_model", "search_url", "embed_url", "embed_model"}


@dataclass(frozen=True)
class ToolChoice:
    kind: str
    path: Optional[Path] = None


@dataclass(frozen=True)
class RunConfig:
    campaign: CampaignConfig
    dataset: Path
    model: ToolChoice
    search: ToolChoice
    embedder: ToolChoice
    embed_dim: int = DEFAULT_DIM
    product_filter: Optional[str] = None
    memory_snapshot: Optional[Path] = None
    output: Optional[Path] = None
    kpi_noise: float = 0.0
    endpoints: Dict[str, str] = field(default_factory=dict)

    @property
    def hermetic(self) -> bool:
        return all(choice.kind != "remote" for choice in (self.model, self.search, self.embedder))

    def with_overrides(self, *, seed=None, output=None, variant=None) -> "RunConfig":
        campaign = self.campaign
        if seed is not None:
            campaign = replace(campaign, seed=seed)
        if variant is not None:
            campaign = replace(campaign, variant=variant)
        return replace(self, campaign=campaign, output=Path(output) if output else self.output)


def _parse_int(name, raw):
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{name}: expected an integer, got {raw!r}") from None


def _tool_choice(name, raw, base: Path, allowed_prefixes) -> ToolChoice:
    raw = raw.strip()
    if raw in ("remote", "hash"):
        return ToolChoice(raw)
    prefix, sep, rest = raw.partition(":")
    if not sep or prefix not in allowed_prefixes:
        raise ValidationError(f"tools.{name}: unsupported choice {raw!r}")
    path = (base / rest.strip()).resolve()
    if not path.is_file():
        raise ValidationError(f"tools.{name}: file not found: {path}")
    return ToolChoice(prefix, path)


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{TOP}]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    top = dict(parser[TOP])
    tools = dict(parser["tools"]) if parser.has_section("tools") else {}
    for extra in sorted(set(parser.sections()) - {TOP, "tools"}):
        raise ValidationError(f"unknown section [{extra}]")
    unknown = sorted(set(top) - KNOWN_TOP) + sorted(f"tools.{k}" for k in set(tools) - KNOWN_TOOLS)
    if unknown:
        raise ValidationError(f"unknown field(s): {', '.join(unknown)}")
    base = path.parent.resolve()

    if "product" not in top:
        raise ValidationError("product: missing")
    ratio = top.get("ratio")
    variant_text = top.get("variant", "full_adaptive")
    if ratio and variant_text in ("fixed", "fixed_growth"):
        variant_text = f"fixed_growth:{ratio}"
    variant = PolicyVariant.parse(variant_text)
    kwargs = {name: _parse_int(name, top[name]) for name in INT_FIELDS if name in top}
    if "temperature" in top:
        try:
            kwargs["temperature"] = float(top["temperature"])
        except ValueError:
            raise ValidationError(f"temperature: expected a number, got {top['temperature']!r}") from None
    campaign = CampaignConfig(product=top["product"], kpi_metric=top.get("kpi_metric", "clicks"), variant=variant, **kwargs)

    if "dataset" not in top:
        raise ValidationError("dataset: missing")
    dataset = (base / top["dataset"]).resolve()
    if not dataset.is_file():
        raise ValidationError(f"dataset: file not found: {dataset}")

    model = _tool_choice("model", tools.get("model", "remote"), base, ("mock", "catalog"))
    search = _tool_choice("search", tools.get("search", "remote"), base, ("fixture",))
    embedder = _tool_choice("embedder", tools.get("embedder", "hash"), base, ())
    endpoints = {k: v for k, v in tools.items() if k in ("chat_url", "chat_model", "search_url", "embed_url", "embed_model")}
    for choice, key in ((model, "chat_url"), (search, "search_url"), (embedder, "embed_url")):
        if choice.kind == "remote" and not endpoints.get(key):
            raise ValidationError(f"tools.{key}: required for a remote backend")

    try:
        kpi_noise = float(top.get("kpi_noise", 0.0))
    except ValueError:
        raise ValidationError(f"kpi_noise: expected a number, got {top['kpi_noise']!r}") from None
    if kpi_noise < 0:
        raise ValidationError("kpi_noise: must be >= 0")
    return RunConfig(
        campaign=campaign,
        dataset=dataset,
        model=model,
        search=search,
        embedder=embedder,
        embed_dim=_parse_int("tools.embed_dim", tools.get("embed_dim", str(DEFAULT_DIM))),
        product_filter=top.get("product_filter") or None,
        memory_snapshot=(base / top["memory_snapshot"]).resolve() if top.get("memory_snapshot") else None,
        output=(base / top["output"]).resolve() if top.get("output") else None,
        kpi_noise=kpi_noise,
        endpoints=endpoints,
    )


def build_embedder(run: RunConfig):
    if run.embedder.kind == "remote":
        return RemoteEmbedder(run.endpoints["embed_url"], run.embed_dim, model=run.endpoints.get("embed_model", "text-embedding"))
    return HashEmbedder(run.embed_dim)


def build_toolbox(run: RunConfig, embedder=None) -> Toolbox:
    """Fresh tools for one campaign. Mocks start from the top of their scripts."""
    embedder = embedder or build_embedder(run)
    if run.model.kind == "mock":
        model = ScriptedChatModel.from_file(run.model.path)
    elif run.model.kind == "catalog":
        model = CatalogChatModel.from_file(run.model.path)
    else:
        model = RemoteChatModel(run.endpoints["chat_url"], model=run.endpoints.get("chat_model", "gpt-4"))
    if run.search.kind == "fixture":
        search = FixtureSearch.from_file(run.search.path)
    else:
        search = RemoteSearch(run.endpoints["search_url"])
    rows = load_dataset(run.dataset, run.product_filter)
    if not rows:
        raise ValidationError(f"dataset: no rows left for product filter {run.product_filter!r}")
    kpi_source = ReplayKpiSource(rows, embedder, noise_sigma=run.kpi_noise, seed=run.campaign.seed)
    if run.memory_snapshot is not None and run.memory_snapshot.is_file():
        memory = MemoryStore.load(run.memory_snapshot)
        if memory.dim != embedder.dim:
            raise ValidationError(f"memory_snapshot: dimension {memory.dim} does not match embedder {embedder.dim}")
    else:
        memory = MemoryStore(embedder.dim)
    return Toolbox(model=model, search=search, embedder=embedder, memory=memory, kpi_source=kpi_source)
