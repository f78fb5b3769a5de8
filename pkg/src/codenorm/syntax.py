"""Tolerant lexical and lightweight syntactic analysis of C/C++ snippets.

The lexer is total: any byte sequence decodes to a token stream whose
concatenated texts reproduce the input exactly. Capture extraction walks
that stream once and tags the token positions the enabled rewrites need.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import NamedTuple


class TokenKind(enum.Enum):
    Identifier = "Identifier"
    Keyword = "Keyword"
    NumberLiteral = "NumberLiteral"
    StringLiteral = "StringLiteral"
    CharLiteral = "CharLiteral"
    LineComment = "LineComment"
    BlockComment = "BlockComment"
    PreprocDirective = "PreprocDirective"
    Punctuator = "Punctuator"
    Whitespace = "Whitespace"


class Token(NamedTuple):
    kind: TokenKind
    text: str
    span: tuple[int, int]  # [start, end) byte offsets into the source
    line: int              # 1-based line of the first byte


KEYWORDS = frozenset("""
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Alignas _Alignof _Atomic _Bool _Complex _Generic _Imaginary _Noreturn
    _Static_assert _Thread_local
    asm bool catch class const_cast constexpr decltype delete dynamic_cast
    explicit false friend mutable namespace new noexcept nullptr operator
    private protected public reinterpret_cast static_assert static_cast
    template this throw true try typeid typename using virtual wchar_t
    char8_t char16_t char32_t
""".split())

# Keywords that start or extend a type-like prefix in declaration detection.
TYPE_KEYWORDS = frozenset("""
    auto bool char char8_t char16_t char32_t const constexpr double extern
    float inline int long mutable register restrict short signed static
    typedef unsigned void volatile wchar_t _Atomic _Bool _Complex _Imaginary
    _Noreturn _Thread_local
""".split())

# Keywords whose next identifier is a tag, itself part of the type.
TAG_KEYWORDS = frozenset(["struct", "union", "enum", "class"])

PUNCT3 = frozenset(["<<=", ">>=", "...", "->*"])
PUNCT2 = frozenset([
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "::", "##",
])

_STRING_PREFIXES = frozenset(["L", "u", "U", "u8", "R", "LR", "uR", "UR", "u8R"])
_CHAR_PREFIXES = frozenset(["L", "u", "U", "u8"])

_WS_RE = re.compile(r"[ \t\r\n\v\f]+")
_IDENT_RE = re.compile(r"(?:[A-Za-z_$]|[^\x00-\x7f])(?:[A-Za-z0-9_$]|[^\x00-\x7f])*")
_NUMBER_RE = re.compile(r"\.?\d(?:[eEpP][+-]|[0-9a-zA-Z_.]|'(?=[0-9a-zA-Z_]))*")
_LINE_COMMENT_RE = re.compile(r"//[^\n]*")
_BLOCK_COMMENT_RE = re.compile(r"/\*(?:[\s\S]*?\*/|[\s\S]*\Z)")
# A directive runs to the end of its (continuation-spliced) line.
_DIRECTIVE_RE = re.compile(r"#(?:\\\r?\n|[^\n])*")
_QUOTED_RE = {
    '"': re.compile(r'"(?:\\\r?\n|\\[^\n]|\\\Z|[^"\\\n])*(?:"|(?=\r?\n)|\Z)'),
    "'": re.compile(r"'(?:\\\r?\n|\\[^\n]|\\\Z|[^'\\\n])*(?:'|(?=\r?\n)|\Z)"),
}
_RAW_STRING_RE = re.compile(r'"(?P<delim>[^()\\\s"]{0,16})\((?:[\s\S]*?\)(?P=delim)"|[\s\S]*\Z)')

_WS_CHARS = " \t\r\n\v\f"
_QUOTES = "\"'"
_DIGITS = "0123456789"


def lex(source: str, warnings: list[str] | None = None) -> list[Token]:
    """Tokenize *source* losslessly; never raises.

    Unterminated strings, chars and block comments are closed at the end of
    the input (or before an unescaped newline for quoted literals) and noted
    in *warnings* when a list is supplied.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    byte_pos = 0
    line = 1
    fresh = True  # only whitespace/comments since the last newline
    while i < n:
        c = source[i]
        kind = None
        text = None
        if c in _WS_CHARS:
            text = _WS_RE.match(source, i).group()
            kind = TokenKind.Whitespace
            if "\n" in text:
                fresh = True
        elif c == "#" and fresh:
            text = _DIRECTIVE_RE.match(source, i).group()
            kind = TokenKind.PreprocDirective
        elif c == "/" and source.startswith("//", i):
            text = _LINE_COMMENT_RE.match(source, i).group()
            kind = TokenKind.LineComment
        elif c == "/" and source.startswith("/*", i):
            text = _BLOCK_COMMENT_RE.match(source, i).group()
            kind = TokenKind.BlockComment
            if not text.endswith("*/") or len(text) < 4:
                _warn(warnings, line, "unterminated block comment closed at end of input")
            # comments neither set nor clear line freshness
        elif c in _QUOTES:
            text = _QUOTED_RE[c].match(source, i).group()
            kind = TokenKind.StringLiteral if c == '"' else TokenKind.CharLiteral
            if len(text) < 2 or not text.endswith(c):
                _warn(warnings, line, "unterminated literal closed early")
            fresh = False
        elif c in _DIGITS or (c == "." and i + 1 < n and source[i + 1] in _DIGITS):
            text = _NUMBER_RE.match(source, i).group()
            kind = TokenKind.NumberLiteral
            fresh = False
        elif c.isalpha() or c == "_" or c == "$" or ord(c) > 0x7F:
            word = _IDENT_RE.match(source, i).group()
            j = i + len(word)
            if j < n and source[j] == '"' and word in _STRING_PREFIXES:
                if "R" in word:
                    m = _RAW_STRING_RE.match(source, j)
                    lit = m.group() if m else _QUOTED_RE['"'].match(source, j).group()
                else:
                    lit = _QUOTED_RE['"'].match(source, j).group()
                text = word + lit
                kind = TokenKind.StringLiteral
                if not text.endswith('"') or len(lit) < 2:
                    _warn(warnings, line, "unterminated literal closed early")
            elif j < n and source[j] == "'" and word in _CHAR_PREFIXES:
                lit = _QUOTED_RE["'"].match(source, j).group()
                text = word + lit
                kind = TokenKind.CharLiteral
                if not text.endswith("'") or len(lit) < 2:
                    _warn(warnings, line, "unterminated literal closed early")
            else:
                text = word
                kind = TokenKind.Keyword if word in KEYWORDS else TokenKind.Identifier
            fresh = False
        else:
            three = source[i:i + 3]
            two = source[i:i + 2]
            if three in PUNCT3:
                text = three
            elif two in PUNCT2:
                text = two
            else:
                text = c
            kind = TokenKind.Punctuator
            fresh = False

        blen = len(text) if text.isascii() else len(text.encode("utf-8", "surrogateescape"))
        tokens.append(Token(kind, text, (byte_pos, byte_pos + blen), line))
        line += text.count("\n")
        byte_pos += blen
        i += len(text)
    return tokens


def _warn(warnings: list[str] | None, line: int, message: str) -> None:
    if warnings is not None:
        warnings.append(f"line {line}: {message}")


class Role(enum.Enum):
    FunctionDefName = "FunctionDefName"
    ParamDeclName = "ParamDeclName"
    LocalDeclName = "LocalDeclName"
    IdentifierUse = "IdentifierUse"
    StringLit = "StringLit"
    CommentSpan = "CommentSpan"


NAME_DECL_ROLES = frozenset({Role.FunctionDefName, Role.ParamDeclName, Role.LocalDeclName})


class CaptureSpan(NamedTuple):
    role: Role
    token_index: int


@dataclass
class QueryPlan:
    """Role set for one consolidated extraction query, plus instrumentation.

    parse_counter counts extraction runs: the single-pass engine performs
    exactly one per source unit, the multi-pass baseline one per enabled
    transformation.
    """

    requested_roles: frozenset[Role] = field(default_factory=frozenset)
    parse_counter: int = 0


class NoFunctionFound(Exception):
    """No recognizable function definition in the token stream."""


_TRIVIA = frozenset({
    TokenKind.Whitespace, TokenKind.LineComment,
    TokenKind.BlockComment, TokenKind.PreprocDirective,
})
_DECL_FOLLOW = frozenset({",", ";", "=", ")", "["})


def extract_captures(tokens: list[Token], plan: QueryPlan) -> list[CaptureSpan]:
    """Locate every requested role in one traversal of *tokens*.

    Raises NoFunctionFound when a name role is requested and no function
    definition can be recognized. Comment/string roles never require one.
    """
    plan.parse_counter += 1
    roles = plan.requested_roles
    captures: list[CaptureSpan] = []

    if Role.StringLit in roles or Role.CommentSpan in roles:
        want_str = Role.StringLit in roles
        want_com = Role.CommentSpan in roles
        for idx, tok in enumerate(tokens):
            if want_str and tok.kind is TokenKind.StringLiteral:
                captures.append(CaptureSpan(Role.StringLit, idx))
            elif want_com and tok.kind in (TokenKind.LineComment, TokenKind.BlockComment):
                captures.append(CaptureSpan(Role.CommentSpan, idx))

    if roles & (NAME_DECL_ROLES | {Role.IdentifierUse}):
        captures.extend(_extract_names(tokens, roles))
        captures.sort(key=lambda c: c.token_index)
    return captures


def _extract_names(tokens: list[Token], roles: frozenset[Role]) -> list[CaptureSpan]:
    sig = [i for i, t in enumerate(tokens) if t.kind not in _TRIVIA]
    shape = _find_function(tokens, sig)
    if shape is None:
        if roles & NAME_DECL_ROLES:
            raise NoFunctionFound("no function definition recognized")
        return []
    name_si, open_si, close_si, body_open_si, body_close_si = shape

    tag_idx = _tag_indices(tokens, sig)
    captures: list[CaptureSpan] = []
    decl_idx: set[int] = set()
    declared: set[str] = set()

    func_tok_idx = sig[name_si]
    if Role.FunctionDefName in roles:
        captures.append(CaptureSpan(Role.FunctionDefName, func_tok_idx))
        decl_idx.add(func_tok_idx)
        declared.add(tokens[func_tok_idx].text)

    if Role.ParamDeclName in roles:
        _scan_declarators(tokens, sig, open_si + 1, close_si, tag_idx,
                          Role.ParamDeclName, captures, decl_idx, declared)
    if Role.LocalDeclName in roles:
        _scan_declarators(tokens, sig, body_open_si + 1, body_close_si, tag_idx,
                          Role.LocalDeclName, captures, decl_idx, declared)

    if Role.IdentifierUse in roles and declared:
        for si in sig:
            tok = tokens[si]
            if (tok.kind is TokenKind.Identifier and tok.text in declared
                    and si not in decl_idx and si not in tag_idx):
                captures.append(CaptureSpan(Role.IdentifierUse, si))
    return captures


def _find_function(tokens: list[Token], sig: list[int]):
    """Locate the first function definition at brace depth zero.

    Returns sig-list indices (name, param open, param close, body open,
    body close) or None. The body close index is len(sig) when the input
    ends before the body's closing brace (tolerance).
    """
    n = len(sig)
    k = 0
    depth = 0
    while k < n:
        tok = tokens[sig[k]]
        if tok.kind is TokenKind.Punctuator:
            if tok.text == "{":
                depth += 1
            elif tok.text == "}":
                depth = max(depth - 1, 0)
        elif (depth == 0 and tok.kind is TokenKind.Identifier and k + 1 < n
              and tokens[sig[k + 1]].text == "("):
            confirmed, jump = _check_candidate(tokens, sig, k)
            if confirmed is not None:
                return confirmed
            if jump is not None:
                k = jump
                continue
        k += 1
    return None


def _check_candidate(tokens: list[Token], sig: list[int], name_si: int):
    """Try to confirm sig[name_si] as a function definition head.

    Returns (shape, None) on success, (None, resume_index) otherwise, where
    resume_index points at a better inner candidate when one was found.
    """
    n = len(sig)
    open_si = name_si + 1
    close_si = _match_group(tokens, sig, open_si)
    if close_si is None:
        return None, None
    j = close_si + 1
    seen_colon = False
    while j < n:
        tok = tokens[sig[j]]
        text = tok.text
        if text == "{":
            body_close = _match_group(tokens, sig, j)
            return (name_si, open_si, close_si, j, n if body_close is None else body_close), None
        if text in (";", "=", "}"):
            return None, None
        if text in ("(", "["):
            end = _match_group(tokens, sig, j)
            if end is None:
                return None, None
            j = end + 1
            continue
        if (not seen_colon and tok.kind is TokenKind.Identifier and j + 1 < n
                and tokens[sig[j + 1]].text == "("):
            # attribute-style prefix swallowed a later head: retry from here
            return None, j
        if text == ":":
            seen_colon = True  # constructor initializer list territory
        j += 1
    return None, None


_GROUP_CLOSE = {"(": ")", "[": "]", "{": "}"}


def _match_group(tokens: list[Token], sig: list[int], open_si: int):
    opener = tokens[sig[open_si]].text
    closer = _GROUP_CLOSE[opener]
    depth = 0
    for j in range(open_si, len(sig)):
        text = tokens[sig[j]].text
        if text == opener:
            depth += 1
        elif text == closer:
            depth -= 1
            if depth == 0:
                return j
    return None


def _tag_indices(tokens: list[Token], sig: list[int]) -> set[int]:
    tags: set[int] = set()
    for k, si in enumerate(sig[:-1]):
        if tokens[si].kind is TokenKind.Keyword and tokens[si].text in TAG_KEYWORDS:
            nxt = sig[k + 1]
            if tokens[nxt].kind is TokenKind.Identifier:
                tags.add(nxt)
    return tags


def _scan_declarators(tokens, sig, start_si, end_si, tag_idx, role,
                      captures, decl_idx, declared):
    """Mark declarator identifiers between two sig indices.

    An identifier declares a name when a type-like run (type keywords,
    identifiers acting as type names, * or &) immediately precedes it and
    one of , ; = ) [ follows.
    """
    run = False
    tag_pending = False
    for k in range(start_si, min(end_si, len(sig))):
        tok = tokens[sig[k]]
        if tok.kind is TokenKind.Identifier:
            if sig[k] in tag_idx:
                tag_pending = False
                continue  # tag is part of the type; run stays active
            follow = tokens[sig[k + 1]].text if k + 1 < len(sig) else ""
            if run and follow in _DECL_FOLLOW:
                captures.append(CaptureSpan(role, sig[k]))
                decl_idx.add(sig[k])
                declared.add(tok.text)
                run = False
            else:
                run = True  # might itself be a typedef-style type name
            tag_pending = False
        elif tok.kind is TokenKind.Keyword:
            if tok.text in TAG_KEYWORDS:
                run = True
                tag_pending = True
            elif tok.text in TYPE_KEYWORDS:
                run = True
                tag_pending = False
            else:
                run = False
                tag_pending = False
        elif tok.text in ("*", "&"):
            tag_pending = False  # extends an active run, never starts one
        else:
            run = False
            tag_pending = False
