"""``section.key = value`` configuration files for the pipeline settings."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields, replace

from .audio import EndpointConfig
from .errors import ConfigError
from .frontend import FrontendConfig
from .hmm import HMMConfig
from .vq import VQConfig


@dataclass(frozen=True)
class PipelineConfig:
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    vq: VQConfig = field(default_factory=VQConfig)
    hmm: HMMConfig = field(default_factory=HMMConfig)

    def with_overrides(self, overrides):
        """Apply ``{"section.key": value}`` overrides; values are already typed."""
        sections = {f.name: getattr(self, f.name) for f in fields(self)}
        changes = {}
        for dotted, value in overrides.items():
            section, key = dotted.split(".", 1)
            changes.setdefault(section, {})[key] = value
        try:
            for section, kv in changes.items():
                sections[section] = replace(sections[section], **kv)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return PipelineConfig(**sections)


def _coerce(raw, typ, where):
    try:
        if typ in (int, "int"):
            return int(raw)
        if typ in (float, "float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {typ if isinstance(typ, str) else typ.__name__}")
    raise ConfigError(f"{where}: unsupported field type {typ!r}")


def parse_config(text, base: PipelineConfig = PipelineConfig()) -> PipelineConfig:
    known = {f.name: {g.name: g.type for g in dataclasses.fields(getattr(base, f.name))}
             for f in fields(base)}
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        where = f"line {lineno}"
        if not sep or not value:
            raise ConfigError(f"{where}: expected section.key = value")
        section, dot, name = key.partition(".")
        if not dot or section not in known or name not in known[section]:
            raise ConfigError(f"{where}: unknown key {key!r}")
        overrides[key] = _coerce(value, known[section][name], where)
    return base.with_overrides(overrides)


def load_config(path, base: PipelineConfig = PipelineConfig()) -> PipelineConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read(), base)
