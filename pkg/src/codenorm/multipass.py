"""Naive multi-pass rewrite engine used as the consolidation baseline.

Each enabled transformation re-lexes the current text and runs its own
extraction query, emulating the one-parse-per-transformation design the
single-pass engine replaces. Benchmarks compare the two; results must agree.
"""

from __future__ import annotations

import functools
from dataclasses import replace

from .syntax import QueryPlan, Role, extract_captures, lex
from .transform import (
    NormalizedUnit,
    Representation,
    TRANSFORM_ORDER,
    TransformConfig,
    apply,
    build_rename_map,
    identity_unit,
)


@functools.lru_cache(maxsize=64)
def _passes(config: TransformConfig) -> tuple[tuple[frozenset[Role], TransformConfig], ...]:
    configs = [
        replace(config, enabled=frozenset({t}), extensions=())
        for t in TRANSFORM_ORDER if t in config.enabled
    ]
    configs.extend(
        replace(config, enabled=frozenset(), extensions=(ext,))
        for ext in config.extensions
    )
    for k in range(len(configs) - 1):  # only the last pass renders the output
        configs[k] = replace(configs[k], representation=Representation.Text)
    return tuple((pc.requested_roles(), pc) for pc in configs)


def normalize_source_multipass(source: str, config: TransformConfig,
                               plan: QueryPlan | None = None) -> NormalizedUnit:
    """Run every enabled transformation as its own lex/extract/rewrite pass."""
    if plan is None:
        plan = QueryPlan()
    passes = _passes(config)
    if not passes:
        return identity_unit(source, config)

    text = source
    unit: NormalizedUnit | None = None
    for k, (roles, pass_config) in enumerate(passes):
        plan.requested_roles = roles
        tokens = lex(text)
        captures = extract_captures(tokens, plan)
        rename_map = build_rename_map(captures, tokens, pass_config)
        unit = apply(tokens, captures, rename_map, pass_config)
        if k < len(passes) - 1:
            text = unit.text
    return replace(unit, canonical=config.canonical)
