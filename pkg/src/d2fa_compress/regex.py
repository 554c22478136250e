"""Compile a set of regular expressions into one complete DFA.

Supported syntax: literals, escapes (``\\n \\t \\r \\f \\v \\xHH \\d \\D \\w \\W
\\s \\S`` and escaped metacharacters), ``.``, classes ``[...]``/``[^...]`` with
ranges, ``* + ?``, ``{n} {n,} {,m} {n,m}``, alternation and grouping. A rule
matches a whole input string; prefix it with ``.*`` (or compile with
``unanchored=True``) for match-anywhere semantics. ``.`` matches every symbol,
newline included. Matching is byte-exact.
"""

from __future__ import annotations

import os
import string
from dataclasses import dataclass

import numpy as np

from .automata import Dfa, renumber_bfs

DEFAULT_STATE_CAP = 2_000_000
MAX_REPEAT = 1000


class RegexSyntaxError(ValueError):
    def __init__(self, rule_index: int, offset: int, message: str):
        self.rule_index = rule_index
        self.offset = offset
        self.message = message
        super().__init__(f"rule {rule_index}, offset {offset}: {message}")


class DfaBlowupError(RuntimeError):
    """Subset construction exceeded the state cap."""


# --------------------------------------------------------------------------
# parsing: AST nodes are tuples
#   ("set", mask) ("cat", items) ("alt", items) ("rep", node, lo, hi|None)


_SPACE = b" \t\n\r\f\v"
_DIGIT = b"0123456789"
_WORD = (string.ascii_letters + string.digits + "_").encode()
_SIMPLE_ESCAPES = {"n": 10, "t": 9, "r": 13, "f": 12, "v": 11, "0": 0, "a": 7, "e": 27}


class _Parser:
    def __init__(self, pattern: str, index: int, code_to_symbol: dict[int, int], full: int):
        self.p = pattern
        self.i = 0
        self.index = index
        self.sym = code_to_symbol
        self.full = full

    def error(self, msg: str, at: int | None = None):
        raise RegexSyntaxError(self.index, self.i if at is None else at, msg)

    def mask_of_codes(self, codes) -> int:
        mask = 0
        for code in codes:
            s = self.sym.get(code)
            if s is not None:
                mask |= 1 << s
        return mask

    def literal(self, code: int, at: int) -> int:
        s = self.sym.get(code)
        if s is None:
            self.error(f"character {chr(code)!r} is outside the alphabet", at)
        return 1 << s

    def parse(self):
        node = self.alternation()
        if self.i < len(self.p):
            self.error("unbalanced ')'")
        return node

    def alternation(self):
        branches = [self.concatenation()]
        while self.i < len(self.p) and self.p[self.i] == "|":
            self.i += 1
            branches.append(self.concatenation())
        return branches[0] if len(branches) == 1 else ("alt", branches)

    def concatenation(self):
        items = []
        while self.i < len(self.p) and self.p[self.i] not in "|)":
            items.append(self.repetition())
        return ("cat", items)

    def repetition(self):
        node = self.atom()
        quantified = False
        while self.i < len(self.p):
            ch = self.p[self.i]
            at = self.i
            if ch in "*+?":
                self.i += 1
                bounds = {"*": (0, None), "+": (1, None), "?": (0, 1)}[ch]
            elif ch == "{":
                bounds = self.braces()
                if bounds is None:
                    break
            else:
                break
            if quantified:
                self.error("multiple repeat", at)
            quantified = True
            node = ("rep", node, bounds[0], bounds[1])
        return node

    def braces(self):
        j = self.p.find("}", self.i)
        if j < 0:
            return None
        body = self.p[self.i + 1:j]
        lo_s, comma, hi_s = body.partition(",")
        if not (lo_s.isdigit() or (comma and lo_s == "")):
            return None
        if hi_s and not hi_s.isdigit():
            return None
        if not comma:
            lo = hi = int(lo_s)
        else:
            lo = int(lo_s) if lo_s else 0
            hi = int(hi_s) if hi_s else None
        if hi is not None and hi < lo:
            self.error("min repeat greater than max repeat")
        if max(lo, hi or 0) > MAX_REPEAT:
            self.error(f"repeat bound exceeds {MAX_REPEAT}")
        self.i = j + 1
        return lo, hi

    def atom(self):
        if self.i >= len(self.p):
            self.error("unexpected end of pattern")
        ch = self.p[self.i]
        at = self.i
        if ch == "(":
            self.i += 1
            if self.p.startswith("?:", self.i):
                self.i += 2
            node = self.alternation()
            if self.i >= len(self.p) or self.p[self.i] != ")":
                self.error("missing ')'", at)
            self.i += 1
            return node
        if ch in "*+?":
            self.error("nothing to repeat")
        if ch == ".":
            self.i += 1
            return ("set", self.full)
        if ch == "[":
            return ("set", self.char_class())
        if ch == "\\":
            return ("set", self.escape(in_class=False))
        self.i += 1
        return ("set", self.literal(ord(ch), at))

    def escape(self, in_class: bool) -> int:
        at = self.i
        self.i += 1
        if self.i >= len(self.p):
            self.error("trailing backslash", at)
        ch = self.p[self.i]
        self.i += 1
        if ch == "x":
            hexits = self.p[self.i:self.i + 2]
            if len(hexits) != 2 or any(h not in string.hexdigits for h in hexits):
                self.error("malformed \\x escape", at)
            self.i += 2
            return self.literal(int(hexits, 16), at)
        if ch in _SIMPLE_ESCAPES:
            return self.literal(_SIMPLE_ESCAPES[ch], at)
        classes = {"d": _DIGIT, "w": _WORD, "s": _SPACE}
        if ch.lower() in classes:
            mask = self.mask_of_codes(classes[ch.lower()])
            return self.full & ~mask if ch.isupper() else mask
        if ch.isalnum():
            self.error(f"unsupported escape \\{ch}", at)
        return self.literal(ord(ch), at)

    def char_class(self) -> int:
        at = self.i
        self.i += 1
        negate = self.i < len(self.p) and self.p[self.i] == "^"
        if negate:
            self.i += 1
        mask = 0
        first = True
        while True:
            if self.i >= len(self.p):
                self.error("unterminated character class", at)
            ch = self.p[self.i]
            if ch == "]" and not first:
                self.i += 1
                break
            first = False
            lo_at = self.i
            lo_code, lo_mask = self.class_item()
            if (lo_code is not None and self.i + 1 < len(self.p)
                    and self.p[self.i] == "-" and self.p[self.i + 1] != "]"):
                self.i += 1
                hi_code, _ = self.class_item()
                if hi_code is None:
                    self.error("bad character range", lo_at)
                if hi_code < lo_code:
                    self.error("bad character range", lo_at)
                mask |= self.mask_of_codes(range(lo_code, hi_code + 1))
            else:
                mask |= lo_mask
        return self.full & ~mask if negate else mask

    def class_item(self):
        """One class member: (code or None for shorthand classes, mask)."""
        ch = self.p[self.i]
        if ch != "\\":
            self.i += 1
            code = ord(ch)
            return code, self.mask_of_codes([code])
        nxt = self.p[self.i + 1:self.i + 2]
        if nxt.lower() in ("d", "w", "s"):
            return None, self.escape(in_class=True)
        start = self.i
        mask = self.escape(in_class=True)
        # recover the code of a single-character escape for ranges
        code = None
        if mask and mask & (mask - 1) == 0:
            sym = mask.bit_length() - 1
            code = next(k for k, v in self.sym.items() if v == sym)
        if code is None:
            self.error("bad escape in class", start)
        return code, mask


# --------------------------------------------------------------------------
# Thompson NFA


class _Nfa:
    def __init__(self):
        self.eps: list[list[int]] = []
        self.edge_mask: list[int] = []
        self.edge_to: list[int] = []

    def state(self) -> int:
        self.eps.append([])
        self.edge_mask.append(0)
        self.edge_to.append(-1)
        return len(self.eps) - 1

    def build(self, node) -> tuple[int, int]:
        kind = node[0]
        if kind == "set":
            a, b = self.state(), self.state()
            self.edge_mask[a] = node[1]
            self.edge_to[a] = b
            return a, b
        if kind == "cat":
            a = b = self.state()
            for item in node[1]:
                s, e = self.build(item)
                self.eps[b].append(s)
                b = e
            return a, b
        if kind == "alt":
            a, b = self.state(), self.state()
            for item in node[1]:
                s, e = self.build(item)
                self.eps[a].append(s)
                self.eps[e].append(b)
            return a, b
        if kind == "rep":
            _, inner, lo, hi = node
            a = b = self.state()
            for _ in range(lo):
                s, e = self.build(inner)
                self.eps[b].append(s)
                b = e
            if hi is None:
                s, e = self.build(inner)
                self.eps[b].append(s)
                self.eps[e].append(s)
                out = self.state()
                self.eps[b].append(out)
                self.eps[e].append(out)
                return a, out
            out = self.state()
            for _ in range(hi - lo):
                s, e = self.build(inner)
                self.eps[b].append(s)
                self.eps[b].append(out)
                b = e
            self.eps[b].append(out)
            return a, out
        raise AssertionError(kind)


def _byte_classes(masks, full: int, m: int) -> np.ndarray:
    """Partition the alphabet so each mask is a union of classes."""
    classes = [full]
    for mask in set(masks):
        refined = []
        for cls in classes:
            inside = cls & mask
            outside = cls & ~mask
            if inside:
                refined.append(inside)
            if outside:
                refined.append(outside)
        classes = refined
    class_of = np.empty(m, dtype=np.int64)
    for k, cls in enumerate(classes):
        for s in range(m):
            if cls >> s & 1:
                class_of[s] = k
    return class_of


def symbol_map(alphabet_size: int, symbols: str | bytes | None) -> dict[int, int]:
    if symbols is None:
        if not 1 <= alphabet_size <= 256:
            raise ValueError("alphabet_size must be in [1, 256]")
        return {code: code for code in range(alphabet_size)}
    codes = list(symbols) if isinstance(symbols, bytes) else [ord(ch) for ch in symbols]
    if len(codes) != alphabet_size or len(set(codes)) != alphabet_size:
        raise ValueError("symbols must list alphabet_size distinct characters")
    return {code: i for i, code in enumerate(codes)}


def compile_regex_set(rules: list[str], alphabet_size: int = 256, *,
                      symbols: str | bytes | None = None, minimize: bool = False,
                      unanchored: bool = False, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """DFA accepting exactly the strings matched (in full) by some rule.

    ``symbols`` optionally names the character for each symbol id; by default
    symbol ``i`` is the byte ``i``.
    """
    code_to_symbol = symbol_map(alphabet_size, symbols)
    m = alphabet_size
    full = (1 << m) - 1
    nfa = _Nfa()
    root = nfa.state()
    accept = nfa.state()
    for idx, rule in enumerate(rules):
        if any(ord(ch) > 255 for ch in rule):
            bad = next(i for i, ch in enumerate(rule) if ord(ch) > 255)
            raise RegexSyntaxError(idx, bad, "non-byte character in pattern")
        ast = _Parser(rule, idx, code_to_symbol, full).parse()
        if unanchored:
            ast = ("cat", [("rep", ("set", full), 0, None), ast])
        s, e = nfa.build(ast)
        nfa.eps[root].append(s)
        nfa.eps[e].append(accept)

    size = len(nfa.eps)
    important = [nfa.edge_mask[x] != 0 or x == accept for x in range(size)]
    closure_cache: dict[int, frozenset] = {}

    def closure(x: int) -> frozenset:
        got = closure_cache.get(x)
        if got is not None:
            return got
        seen = {x}
        stack = [x]
        while stack:
            y = stack.pop()
            for z in nfa.eps[y]:
                if z not in seen:
                    seen.add(z)
                    stack.append(z)
        got = frozenset(z for z in seen if important[z])
        closure_cache[x] = got
        return got

    class_of = _byte_classes([mk for mk in nfa.edge_mask if mk], full, m)
    n_classes = int(class_of.max()) + 1
    rep = np.zeros(n_classes, dtype=np.int64)
    rep[class_of[::-1]] = np.arange(m)[::-1]
    edge_classes: dict[int, list[int]] = {}
    for x in range(size):
        mk = nfa.edge_mask[x]
        if mk:
            edge_classes[x] = [k for k in range(n_classes) if mk >> int(rep[k]) & 1]

    start_set = closure(root)
    ids = {start_set: 0}
    sets = [start_set]
    rows: list[list[int]] = []
    i = 0
    while i < len(sets):
        current = sets[i]
        buckets: list[set] = [set() for _ in range(n_classes)]
        for x in current:
            if x == accept:
                continue
            target = closure(nfa.edge_to[x])
            for k in edge_classes[x]:
                buckets[k] |= target
        row = []
        for bucket in buckets:
            key = frozenset(bucket)
            sid = ids.get(key)
            if sid is None:
                sid = len(sets)
                if sid >= state_cap:
                    raise DfaBlowupError(f"DFA blow-up: more than {state_cap} states")
                ids[key] = sid
                sets.append(key)
            row.append(sid)
        rows.append(row)
        i += 1

    class_table = np.array(rows, dtype=np.int64).reshape(len(sets), n_classes)
    table = class_table[:, class_of]
    accepting = [sid for sid, st in enumerate(sets) if accept in st]
    if minimize:
        table, accepting, start = _minimize(table, accepting, 0)
        return renumber_bfs(table, start, accepting)
    return renumber_bfs(table, 0, accepting)


def _minimize(table: np.ndarray, accepting, start: int):
    """Moore partition refinement; returns the quotient automaton."""
    n = table.shape[0]
    block = np.zeros(n, dtype=np.int64)
    block[list(accepting)] = 1
    _, block = np.unique(block, return_inverse=True)
    while True:
        signature = np.column_stack([block, block[table]])
        _, new_block = np.unique(signature, axis=0, return_inverse=True)
        new_block = new_block.ravel()
        if new_block.max() == block.max():
            break
        block = new_block
    k = int(block.max()) + 1
    rep = np.zeros(k, dtype=np.int64)
    rep[block[::-1]] = np.arange(n)[::-1]
    quotient = block[table[rep]]
    acc = sorted({int(block[a]) for a in accepting})
    return quotient, acc, int(block[start])


# --------------------------------------------------------------------------
# rule files and synthetic rule sets


def read_rules(path: str | os.PathLike) -> list[tuple[int, str]]:
    """(line number, pattern) for every non-blank, non-comment line."""
    out = []
    with open(path, encoding="latin-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            out.append((lineno, line))
    return out


@dataclass
class RuleSetConfig:
    """Shape of a synthetic signature set.

    ``wildcard_rate`` is the fraction of rules that use ``* + ?``;
    ``length_restriction_rate`` the fraction with a counted repeat. Counted
    repeats draw a lower bound uniformly from ``restriction_low`` and a span
    uniformly from ``restriction_span`` (both inclusive ranges).
    """

    rule_count: int = 12
    avg_length: float = 34.0
    wildcard_rate: float = 0.5
    length_restriction_rate: float = 0.33
    restriction_low: tuple[int, int] = (1, 4)
    restriction_span: tuple[int, int] = (0, 4)
    literal_chars: str = string.ascii_lowercase + string.digits + "/=_-"
    seed: int = 0


def generate_rules(cfg: RuleSetConfig) -> list[str]:
    """Signature-like patterns, each ``.*`` prefixed (match anywhere)."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7,)))
    lits = cfg.literal_chars
    rules = []
    for _ in range(cfg.rule_count):
        length = max(3, int(rng.poisson(cfg.avg_length)))
        tokens = [lits[int(j)] for j in rng.integers(0, len(lits), size=length)]
        if rng.random() < cfg.wildcard_rate:
            kind = int(rng.integers(4))
            if kind < 2:
                gap = "[^\\n]*" if kind == 0 else ".*"
                tokens.insert(int(rng.integers(1, len(tokens))), gap)
            else:
                pos = int(rng.integers(len(tokens)))
                tokens[pos] += "+" if kind == 2 else "?"
        if rng.random() < cfg.length_restriction_rate:
            lo = int(rng.integers(cfg.restriction_low[0], cfg.restriction_low[1] + 1))
            span = int(rng.integers(cfg.restriction_span[0], cfg.restriction_span[1] + 1))
            cls = ["\\d", "[a-f0-9]", "[^/]"][int(rng.integers(3))]
            bound = f"{{{lo}}}" if span == 0 else f"{{{lo},{lo + span}}}"
            tokens.insert(int(rng.integers(1, len(tokens))), cls + bound)
        rules.append(".*" + "".join(tokens))
    return rules
