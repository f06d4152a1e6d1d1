"""Resource budgets, overridable through the ``BTM_LAB_BUDGET`` environment variable.

The variable holds either a JSON object or a comma separated ``key=value`` list,
for example ``BTM_LAB_BUDGET="window_sites=4000,spectral_sites=8000"``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace

from .errors import InvalidParameter

ENV_VAR = "BTM_LAB_BUDGET"


@dataclass(frozen=True)
class Budget:
    landscape_sites: int = 50_000_000
    window_sites: int = 20_001
    spectral_sites: int = 20_001
    uniformization_steps: int = 100_000
    # steps * window size above which uniformization defers to the spectral backend
    uniformization_work: int = 50_000_000
    window_doublings: int = 12
    scale_bits: int = 4096
    mc_paths: int = 10_000_000

    def override(self, **kwargs) -> "Budget":
        return replace(self, **kwargs)


def parse_budget(text: str) -> dict:
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        return dict(json.loads(text))
    out = {}
    for item in text.split(","):
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def current_budget() -> Budget:
    """The default budget with any environment overrides applied."""
    raw = parse_budget(os.environ.get(ENV_VAR, ""))
    known = {f.name for f in fields(Budget)}
    unknown = set(raw) - known
    if unknown:
        raise InvalidParameter(f"unknown {ENV_VAR} keys: {sorted(unknown)}")
    return Budget(**{k: int(float(v)) for k, v in raw.items()})
