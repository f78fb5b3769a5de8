"""Single-pass application of the enabled rewrites to a token stream.

All transformation-relevant positions come in as capture spans from one
extraction query; the rewrite itself is a single traversal that renders
either normalized text or a whitespace-free token array, always together
with a stable content digest used as the dedup key.
"""

from __future__ import annotations

import enum
import hashlib
import re
import struct
from dataclasses import dataclass, field, replace
from typing import Callable

from .syntax import (
    CaptureSpan,
    NoFunctionFound,
    QueryPlan,
    Role,
    Token,
    TokenKind,
    extract_captures,
    lex,
)


class Transform(enum.Enum):
    VarRename = "var_rename"
    FuncRename = "func_rename"
    StringGeneralize = "string_generalize"
    CommentRemove = "comment_remove"
    WhitespaceNormalize = "whitespace_normalize"


ALL_TRANSFORMS = frozenset(Transform)

# Canonical pass order for the multi-pass baseline and reference tooling.
TRANSFORM_ORDER = (
    Transform.VarRename,
    Transform.FuncRename,
    Transform.StringGeneralize,
    Transform.CommentRemove,
    Transform.WhitespaceNormalize,
)

_ROLES_FOR = {
    Transform.VarRename: frozenset({Role.ParamDeclName, Role.LocalDeclName, Role.IdentifierUse}),
    Transform.FuncRename: frozenset({Role.FunctionDefName, Role.IdentifierUse}),
    Transform.StringGeneralize: frozenset({Role.StringLit}),
    Transform.CommentRemove: frozenset({Role.CommentSpan}),
    Transform.WhitespaceNormalize: frozenset(),
}


class Representation(enum.Enum):
    Text = "text"
    TokenArray = "token_array"


class OnNoFunction(enum.Enum):
    PassThrough = "pass"
    Reject = "reject"


@dataclass(frozen=True)
class TokenTransform:
    """Extension point: a named transformation descriptor.

    *roles* are merged into the consolidated extraction query; *rewrite* is
    called once per token during the single traversal with the token and its
    capture role (or None) and returns a replacement (kind, text) pair or
    None to leave the token alone.
    """

    name: str
    roles: frozenset[Role]
    rewrite: Callable[[Token, Role | None], tuple[TokenKind, str] | None]


@dataclass(frozen=True)
class TransformConfig:
    enabled: frozenset[Transform] = frozenset()
    var_prefix: str = "var_"
    func_prefix: str = "func_"
    string_placeholder: str = "str"
    representation: Representation = Representation.Text
    on_no_function: OnNoFunction = OnNoFunction.PassThrough
    extensions: tuple[TokenTransform, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "enabled", frozenset(self.enabled))
        for prefix in (self.var_prefix, self.func_prefix):
            if not _lexes_as_single_identifier(prefix + "0"):
                raise ValueError(f"prefix {prefix!r} does not form identifiers")
        probe = lex('"' + self.string_placeholder + '"')
        if len(probe) != 1 or probe[0].kind is not TokenKind.StringLiteral:
            raise ValueError(f"placeholder {self.string_placeholder!r} breaks string literals")

    @property
    def canonical(self) -> bool:
        """True when every built-in generalization is enabled (dedup form)."""
        return ALL_TRANSFORMS <= self.enabled

    def requested_roles(self) -> frozenset[Role]:
        roles: frozenset[Role] = frozenset()
        for t in self.enabled:
            roles |= _ROLES_FOR[t]
        for ext in self.extensions:
            roles |= ext.roles
        return roles


def canonical_config(representation: Representation = Representation.Text) -> TransformConfig:
    return TransformConfig(enabled=ALL_TRANSFORMS, representation=representation)


def _lexes_as_single_identifier(text: str) -> bool:
    toks = lex(text)
    return len(toks) == 1 and toks[0].kind is TokenKind.Identifier


@dataclass(frozen=True)
class RenameMap:
    vars: dict[str, str] = field(default_factory=dict)
    funcs: dict[str, str] = field(default_factory=dict)


_IDENTISH_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


def build_rename_map(captures: list[CaptureSpan], tokens: list[Token],
                     config: TransformConfig) -> RenameMap:
    """Assign canonical names in first-occurrence order, densely from 0.

    A candidate index is skipped when the generated name would collide with
    an identifier that stays unrenamed in the unit (including identifier-like
    text inside preprocessor directives, which is never rewritten).
    """
    var_originals: list[str] = []
    func_originals: list[str] = []
    seen_vars: set[str] = set()
    seen_funcs: set[str] = set()
    for cap in captures:
        text = tokens[cap.token_index].text
        if cap.role in (Role.ParamDeclName, Role.LocalDeclName):
            if Transform.VarRename in config.enabled and text not in seen_vars:
                seen_vars.add(text)
                var_originals.append(text)
        elif cap.role is Role.FunctionDefName:
            if Transform.FuncRename in config.enabled and text not in seen_funcs:
                seen_funcs.add(text)
                func_originals.append(text)

    unrenamed = {t.text for t in tokens if t.kind is TokenKind.Identifier}
    unrenamed -= seen_vars
    unrenamed -= seen_funcs
    for t in tokens:
        if t.kind is TokenKind.PreprocDirective:
            unrenamed.update(_IDENTISH_RE.findall(t.text))

    return RenameMap(
        vars=_assign(var_originals, config.var_prefix, unrenamed),
        funcs=_assign(func_originals, config.func_prefix, unrenamed),
    )


def _assign(originals: list[str], prefix: str, avoid: set[str]) -> dict[str, str]:
    mapping: dict[str, str] = {}
    k = 0
    for name in originals:
        while prefix + str(k) in avoid:
            k += 1
        mapping[name] = prefix + str(k)
        k += 1
    return mapping


class RepresentationMismatch(Exception):
    """Unit was rendered in the other representation."""


@dataclass(frozen=True)
class NormalizedUnit:
    text: str | None
    tokens: tuple[tuple[str, str], ...] | None
    hash: int
    canonical: bool


_NAME_ROLE_NS = {Role.ParamDeclName: "vars", Role.LocalDeclName: "vars",
                 Role.FunctionDefName: "funcs"}
_COMMENTS = (TokenKind.LineComment, TokenKind.BlockComment)


def apply(tokens: list[Token], captures: list[CaptureSpan], rename_map: RenameMap,
          config: TransformConfig) -> NormalizedUnit:
    """Rewrite *tokens* in one traversal and render the configured output."""
    role_at: dict[int, Role] = {c.token_index: c.role for c in captures}
    enabled = config.enabled
    do_var = Transform.VarRename in enabled
    do_func = Transform.FuncRename in enabled
    do_str = Transform.StringGeneralize in enabled
    do_com = Transform.CommentRemove in enabled
    do_ws = Transform.WhitespaceNormalize in enabled

    directive_adjacent = _directive_adjacency(tokens) if do_ws else None

    pieces: list[tuple[TokenKind, str]] = []
    pending_ws: str | None = None  # collapsed separator under do_ws
    for i, tok in enumerate(tokens):
        kind, text = tok.kind, tok.text
        role = role_at.get(i)
        if kind is TokenKind.Identifier and role is not None:
            ns = _NAME_ROLE_NS.get(role)
            if ns == "vars" and do_var:
                text = rename_map.vars.get(text, text)
            elif ns == "funcs" and do_func:
                text = rename_map.funcs.get(text, text)
            elif role is Role.IdentifierUse:
                if do_var and text in rename_map.vars:
                    text = rename_map.vars[text]
                elif do_func and text in rename_map.funcs:
                    text = rename_map.funcs[text]
        elif kind is TokenKind.StringLiteral and do_str and role is Role.StringLit:
            text = _generalize_string(text, config.string_placeholder)
        elif kind in _COMMENTS and do_com and role is Role.CommentSpan:
            kind, text = TokenKind.Whitespace, " "

        for ext in config.extensions:
            replaced = ext.rewrite(Token(kind, text, tok.span, tok.line), role)
            if replaced is not None:
                kind, text = replaced

        if not do_ws:
            pieces.append((kind, text))
            continue
        if kind is TokenKind.Whitespace:
            # a newline survives next to a directive and after a line comment,
            # otherwise collapsing would merge following code into them
            sep = " "
            if directive_adjacent[i] or (pieces and pieces[-1][0] is TokenKind.LineComment):
                sep = "\n"
            if pending_ws != "\n":
                pending_ws = sep
            continue
        if pending_ws is not None and pieces:
            pieces.append((TokenKind.Whitespace, pending_ws))
        pending_ws = None
        pieces.append((kind, text))
    # trailing pending whitespace is stripped

    visible = [(k, t) for k, t in pieces if k is not TokenKind.Whitespace]
    digest = _hash_pieces(visible)
    if config.representation is Representation.Text:
        return NormalizedUnit(text="".join(t for _, t in pieces), tokens=None,
                              hash=digest, canonical=config.canonical)
    return NormalizedUnit(text=None, tokens=tuple((k.value, t) for k, t in visible),
                          hash=digest, canonical=config.canonical)


def _directive_adjacency(tokens: list[Token]) -> list[bool]:
    """Per token: is the nearest non-trivia neighbour a preprocessor line?

    Whitespace touching a directive keeps a newline so the directive cannot
    be merged with surrounding code by whitespace normalization.
    """
    n = len(tokens)
    skip = (TokenKind.Whitespace,) + _COMMENTS
    adjacent = [False] * n
    prev_kind: TokenKind | None = None
    next_kind: list[TokenKind | None] = [None] * n
    upcoming: TokenKind | None = None
    for i in range(n - 1, -1, -1):
        next_kind[i] = upcoming
        if tokens[i].kind not in skip:
            upcoming = tokens[i].kind
    for i, tok in enumerate(tokens):
        if tok.kind in skip:
            adjacent[i] = (prev_kind is TokenKind.PreprocDirective
                           or next_kind[i] is TokenKind.PreprocDirective)
        else:
            prev_kind = tok.kind
    return adjacent


def _generalize_string(text: str, placeholder: str) -> str:
    first = text.find('"')
    last = text.rfind('"')
    if first < 0 or last <= first:
        return text  # unterminated literal: leave as lexed
    return text[:first + 1] + placeholder + text[last:]


_KIND_ORDINAL = {kind: i for i, kind in enumerate(TokenKind)}


def _hash_pieces(pieces: list[tuple[TokenKind, str]]) -> int:
    """64-bit blake2b over the (kind, text) sequence, platform-stable."""
    h = hashlib.blake2b(digest_size=8)
    pack = struct.Struct("<BI").pack
    for kind, text in pieces:
        data = text.encode("utf-8", "surrogateescape")
        h.update(pack(_KIND_ORDINAL[kind], len(data)))
        h.update(data)
    return int.from_bytes(h.digest(), "big")


def render_token_array(unit: NormalizedUnit) -> list[tuple[str, str]]:
    if unit.tokens is None:
        raise RepresentationMismatch("unit was rendered as text, not a token array")
    return list(unit.tokens)


def normalized_hash(unit: NormalizedUnit) -> int:
    """Dedup digest of the unit; callers pass units built with the canonical
    (fully generalized) configuration when the digest is used for grouping."""
    return unit.hash


def normalize_source(source: str, config: TransformConfig,
                     plan: QueryPlan | None = None) -> NormalizedUnit:
    """Lex, extract once, rewrite: the whole single-pass pipeline for one unit.

    Raises NoFunctionFound (propagated from extraction) when renames are
    requested and the snippet holds no recognizable function definition.
    A caller-supplied *plan* must already carry the config's role set.
    """
    if plan is None:
        plan = QueryPlan(config.requested_roles())
    tokens = lex(source)
    captures = extract_captures(tokens, plan)
    rename_map = build_rename_map(captures, tokens, config)
    return apply(tokens, captures, rename_map, config)


def identity_unit(source: str, config: TransformConfig,
                  tokens: list[Token] | None = None) -> NormalizedUnit:
    """Untransformed rendering of *source* (pass-through policy).

    The canonical flag still reflects *config* so downstream dedup can tell
    which pipeline produced the unit.
    """
    if tokens is None:
        tokens = lex(source)
    unit = apply(tokens, [], RenameMap(), replace(config, enabled=frozenset(), extensions=()))
    return NormalizedUnit(text=unit.text, tokens=unit.tokens, hash=unit.hash,
                          canonical=config.canonical)


__all__ = [
    "ALL_TRANSFORMS", "NoFunctionFound", "NormalizedUnit", "OnNoFunction",
    "RenameMap", "Representation", "RepresentationMismatch", "TokenTransform",
    "Transform", "TransformConfig", "TRANSFORM_ORDER", "apply",
    "build_rename_map", "canonical_config", "identity_unit", "normalize_source",
    "normalized_hash", "render_token_array",
]
