"""Reference scanner used as the lexing oracle.

Deliberately naive character-by-character implementation, kept free of the
package's regex-driven lexer so the two can be compared token-for-token.
Emits plain (kind, text) string pairs.
"""

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

PUNCT3 = frozenset(["<<=", ">>=", "...", "->*"])
PUNCT2 = frozenset([
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "::", "##",
])

STRING_PREFIXES = frozenset(["L", "u", "U", "u8", "R", "LR", "uR", "UR", "u8R"])
CHAR_PREFIXES = frozenset(["L", "u", "U", "u8"])

_WS = " \t\r\n\v\f"
_DIGITS = "0123456789"
_ALNUM = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _is_ident_start(ch):
    return ch.isalpha() or ch == "_" or ch == "$" or ord(ch) > 0x7F


def _is_ident_cont(ch):
    return ch.isalnum() or ch == "_" or ch == "$" or ord(ch) > 0x7F


def scan(source):
    """Tokenize *source* into (kind, text) pairs. Total: never raises."""
    out = []
    i = 0
    n = len(source)
    fresh = True  # only whitespace/comments seen since the last newline
    while i < n:
        c = source[i]
        if c in _WS:
            j = i
            while j < n and source[j] in _WS:
                j += 1
            text = source[i:j]
            out.append(("Whitespace", text))
            if "\n" in text:
                fresh = True
            i = j
            continue
        if c == "#" and fresh:
            j = i + 1
            while j < n:
                if source[j] == "\n":
                    break
                if source[j] == "\\":
                    if j + 1 < n and source[j + 1] == "\n":
                        j += 2
                        continue
                    if j + 2 < n and source[j + 1] == "\r" and source[j + 2] == "\n":
                        j += 3
                        continue
                j += 1
            out.append(("PreprocDirective", source[i:j]))
            i = j
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            j = i + 2
            while j < n and source[j] != "\n":
                j += 1
            out.append(("LineComment", source[i:j]))
            # comments neither set nor clear line freshness
            i = j
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "*":
            end = source.find("*/", i + 2)
            j = n if end < 0 else end + 2
            out.append(("BlockComment", source[i:j]))
            i = j
            continue
        if c == '"':
            j, text = _scan_quoted(source, i, '"')
            out.append(("StringLiteral", text))
            fresh = False
            i = j
            continue
        if c == "'":
            j, text = _scan_quoted(source, i, "'")
            out.append(("CharLiteral", text))
            fresh = False
            i = j
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and source[i + 1] in _DIGITS):
            j, text = _scan_number(source, i)
            out.append(("NumberLiteral", text))
            fresh = False
            i = j
            continue
        if _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_cont(source[j]):
                j += 1
            word = source[i:j]
            if j < n and source[j] == '"' and word in STRING_PREFIXES:
                if "R" in word:
                    j2, lit = _scan_raw_string(source, j)
                else:
                    j2, lit = _scan_quoted(source, j, '"')
                out.append(("StringLiteral", word + lit))
                fresh = False
                i = j2
                continue
            if j < n and source[j] == "'" and word in CHAR_PREFIXES:
                j2, lit = _scan_quoted(source, j, "'")
                out.append(("CharLiteral", word + lit))
                fresh = False
                i = j2
                continue
            kind = "Keyword" if word in KEYWORDS else "Identifier"
            out.append((kind, word))
            fresh = False
            i = j
            continue
        if source[i:i + 3] in PUNCT3:
            out.append(("Punctuator", source[i:i + 3]))
            fresh = False
            i += 3
            continue
        if source[i:i + 2] in PUNCT2:
            out.append(("Punctuator", source[i:i + 2]))
            fresh = False
            i += 2
            continue
        out.append(("Punctuator", c))
        fresh = False
        i += 1
    return out


def _scan_quoted(source, i, quote):
    # i points at the opening quote; tolerate EOF and unescaped newline
    n = len(source)
    j = i + 1
    while j < n:
        ch = source[j]
        if ch == quote:
            j += 1
            break
        if ch == "\n":
            break  # unterminated: stop before the newline
        if ch == "\\":
            if j + 1 < n and source[j + 1] == "\n":
                j += 2
                continue
            if j + 2 < n and source[j + 1] == "\r" and source[j + 2] == "\n":
                j += 3
                continue
            if j + 1 < n:
                j += 2
                continue
            j += 1  # lone backslash at EOF
            break
        j += 1
    return j, source[i:j]


def _scan_raw_string(source, i):
    # i points at the opening quote of R"delim( ... )delim"
    n = len(source)
    j = i + 1
    delim_start = j
    while j < n and j - delim_start <= 16 and source[j] not in '()\\"' and source[j] not in _WS:
        j += 1
    if j < n and source[j] == "(" and j - delim_start <= 16:
        delim = source[delim_start:j]
        closer = ")" + delim + '"'
        end = source.find(closer, j + 1)
        if end < 0:
            return n, source[i:]
        return end + len(closer), source[i:end + len(closer)]
    return _scan_quoted(source, i, '"')  # malformed: plain string scan


def _scan_number(source, i):
    # preprocessing-number: digits/letters/dots, exponent signs, ' separators
    n = len(source)
    j = i + 1 if source[i].isdigit() else i + 2  # ".5" consumes two chars
    while j < n:
        ch = source[j]
        if ch in "eEpP" and j + 1 < n and source[j + 1] in "+-":
            j += 2
            continue
        if ch in _ALNUM or ch in "._":
            j += 1
            continue
        if ch == "'" and j + 1 < n and (source[j + 1] in _ALNUM or source[j + 1] == "_"):
            j += 1
            continue
        break
    return j, source[i:j]
