"""Delayed DFAs: sparse labeled rows plus at most one default transition
per state, with resolution, matching, delay metrics and equivalence checks."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .automata import Dfa, DfaFormatError, _content_lines, parse_header
from .forest import Forest


class D2faError(ValueError):
    pass


class UnresolvableTransition(D2faError):
    def __init__(self, state: int, char: int, reason: str = "unresolvable"):
        self.state = state
        self.char = char
        super().__init__(f"{reason}: state {state}, character {char}")


@dataclass(frozen=True, eq=False)
class D2fa:
    """CSR layout: row ``u`` owns ``chars/targets[offsets[u]:offsets[u+1]]``,
    sorted by character. ``default[u]`` is ``-1`` when ``u`` has none."""

    alphabet_size: int
    offsets: np.ndarray
    chars: np.ndarray
    targets: np.ndarray
    default: np.ndarray
    start: int = 0
    accepting: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        chars = np.ascontiguousarray(self.chars, dtype=np.int32)
        targets = np.ascontiguousarray(self.targets, dtype=np.int32)
        default = np.ascontiguousarray(self.default, dtype=np.int32)
        n = default.shape[0]
        if n < 1 or offsets.shape != (n + 1,) or offsets[0] != 0 or offsets[-1] != chars.shape[0]:
            raise D2faError("malformed row offsets")
        if chars.shape != targets.shape:
            raise D2faError("chars and targets differ in length")
        if chars.size and (chars.min() < 0 or chars.max() >= self.alphabet_size):
            raise D2faError("character out of range")
        if targets.size and (targets.min() < 0 or targets.max() >= n):
            raise D2faError("state id out of range")
        if default.min() < -1 or default.max() >= n:
            raise D2faError("default target out of range")
        if np.any(default == np.arange(n)):
            raise D2faError("self default transition")
        if not 0 <= self.start < n:
            raise D2faError("start state out of range")
        row_of = np.repeat(np.arange(n), np.diff(offsets))
        same_row = row_of[1:] == row_of[:-1]
        if np.any(same_row & (chars[1:] <= chars[:-1])):
            raise D2faError("row characters must be strictly increasing")
        accepting = frozenset(int(a) for a in self.accepting)
        if any(not 0 <= a < n for a in accepting):
            raise D2faError("accepting state out of range")
        for name, arr in (("offsets", offsets), ("chars", chars), ("targets", targets), ("default", default)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "accepting", accepting)

    @property
    def state_count(self) -> int:
        return self.default.shape[0]

    @property
    def labeled_count(self) -> int:
        return int(self.chars.shape[0])

    @property
    def default_count(self) -> int:
        return int(np.count_nonzero(self.default >= 0))

    def default_of(self, u: int) -> int | None:
        d = int(self.default[u])
        return None if d < 0 else d

    def labeled(self, u: int) -> dict[int, int]:
        lo, hi = self.offsets[u], self.offsets[u + 1]
        return dict(zip(self.chars[lo:hi].tolist(), self.targets[lo:hi].tolist()))

    def check_total(self) -> None:
        """Raise unless every (state, character) resolves.

        Walks default chains; a chain either ends at a defaultless state,
        which then needs the character, or enters a cycle, which needs the
        character somewhere on it.
        """
        dest, _ = K.resolve_all(self.offsets, self.chars, self.targets, self.default, self.alphabet_size)
        bad = np.argwhere(dest < 0)
        if bad.size:
            u, c = (int(x) for x in bad[0])
            raise UnresolvableTransition(u, c)

    @classmethod
    def from_rows(cls, alphabet_size: int, rows: list[dict[int, int]], default,
                  start: int = 0, accepting=()) -> "D2fa":
        offsets = np.zeros(len(rows) + 1, dtype=np.int64)
        chars, targets = [], []
        for u, row in enumerate(rows):
            items = sorted(row.items())
            chars.extend(c for c, _ in items)
            targets.extend(t for _, t in items)
            offsets[u + 1] = offsets[u] + len(items)
        dflt = np.array([-1 if d is None else d for d in default], dtype=np.int32)
        return cls(alphabet_size, offsets, np.array(chars, dtype=np.int32),
                   np.array(targets, dtype=np.int32), dflt, start, frozenset(accepting))

    @classmethod
    def from_dfa(cls, dfa: Dfa) -> "D2fa":
        n, m = dfa.table.shape
        offsets = np.arange(n + 1, dtype=np.int64) * m
        chars = np.tile(np.arange(m, dtype=np.int32), n)
        return cls(m, offsets, chars, dfa.table.ravel(), np.full(n, -1, np.int32),
                   dfa.start, dfa.accepting)


def similarity(dfa: Dfa, u: int, v: int) -> int:
    """Number of characters on which ``u`` and ``v`` go to the same state."""
    return int(np.count_nonzero(dfa.table[u] == dfa.table[v]))


def resolve(d2fa: D2fa, u: int, c: int) -> tuple[int, int]:
    """Follow defaults from ``u`` until a ``c``-labeled transition is found.

    Returns ``(next_state, defaults_followed)``.
    """
    t, delay = K.resolve_step(d2fa.offsets, d2fa.chars, d2fa.targets, d2fa.default,
                              u, c, d2fa.state_count)
    if t == -2:
        raise UnresolvableTransition(u, c, "default loop without a labeled transition")
    if t < 0:
        raise UnresolvableTransition(u, c)
    return int(t), int(delay)


@dataclass(frozen=True)
class MatchResult:
    end_state: int
    accepted: bool
    matching_delay: int
    accepting_positions: list[int]


def match_string(d2fa: D2fa, s) -> MatchResult:
    """Run ``s`` (a sequence of symbol ids, e.g. bytes) from the start state.

    ``accepting_positions`` holds every prefix length ``i >= 1`` whose end
    state is accepting.
    """
    x = d2fa.start
    total = 0
    positions = []
    for i, c in enumerate(s, 1):
        x, d = resolve(d2fa, x, int(c))
        total += d
        if x in d2fa.accepting:
            positions.append(i)
    return MatchResult(x, x in d2fa.accepting, total, positions)


def _flatten(strings) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(s) for s in strings), dtype=np.int64, count=len(strings))
    bounds = np.zeros(len(strings) + 1, dtype=np.int64)
    np.cumsum(lengths, out=bounds[1:])
    flat = np.empty(int(bounds[-1]), dtype=np.int64)
    for i, s in enumerate(strings):
        flat[bounds[i]:bounds[i + 1]] = np.frombuffer(s, dtype=np.uint8) if isinstance(s, bytes) else s
    return flat, bounds


def match_many(d2fa: D2fa, strings) -> tuple[np.ndarray, np.ndarray]:
    """End states and matching delays for a batch of strings."""
    flat, bounds = _flatten(strings)
    if flat.size and flat.max() >= d2fa.alphabet_size:
        raise ValueError("symbol outside the alphabet")
    ends, delays = K.match_batch(d2fa.offsets, d2fa.chars, d2fa.targets, d2fa.default,
                                 d2fa.start, flat, bounds)
    if np.any(ends < 0):
        raise UnresolvableTransition(-1, -1, "unresolvable transition while matching")
    return ends, delays


def run_dfa_many(dfa: Dfa, strings) -> np.ndarray:
    flat, bounds = _flatten(strings)
    return K.dfa_run_batch(dfa.table, dfa.start, flat, bounds)


class Scanner:
    """Incremental matcher for input that arrives in chunks of symbol ids."""

    def __init__(self, d2fa: D2fa):
        self.d2fa = d2fa
        self.state = d2fa.start
        self.consumed = 0
        self.delay = 0
        self.worst_step = 0
        self._accept = np.zeros(d2fa.state_count, dtype=np.bool_)
        self._accept[list(d2fa.accepting)] = True

    def feed(self, symbols) -> np.ndarray:
        """Consume ``symbols``; returns the accepting prefix lengths reached."""
        data = np.asarray(symbols, dtype=np.int64)
        if data.size and (data.min() < 0 or data.max() >= self.d2fa.alphabet_size):
            raise ValueError("symbol outside the alphabet")
        g = self.d2fa
        state, delay, worst, hits, fail = K.scan_chunk(g.offsets, g.chars, g.targets, g.default,
                                                      self._accept, self.state, data, self.consumed)
        self.delay += int(delay)
        self.worst_step = max(self.worst_step, int(worst))
        if fail >= 0:
            self.state = int(state)
            self.consumed += int(fail)
            raise UnresolvableTransition(self.state, int(data[fail]))
        self.state = int(state)
        self.consumed += int(data.size)
        return hits


def longest_delay(d2fa: D2fa) -> int:
    """Most defaults followed to consume any single character from any state."""
    dest, delay = K.resolve_all(d2fa.offsets, d2fa.chars, d2fa.targets, d2fa.default, d2fa.alphabet_size)
    if np.any(dest < 0):
        u, c = (int(x) for x in np.argwhere(dest < 0)[0])
        raise UnresolvableTransition(u, c)
    return int(delay.max())


def build_from_forest(dfa: Dfa, forest: Forest) -> D2fa:
    """Defaults along forest edges; keep a labeled transition only where it
    differs from the parent's original transition (roots keep full rows)."""
    n, m = dfa.table.shape
    if forest.node_count != n:
        raise D2faError(f"forest spans {forest.node_count} nodes, DFA has {n} states")
    forest.check_acyclic()
    parent = forest.parent
    keep = np.ones((n, m), dtype=bool)
    child = np.flatnonzero(parent >= 0)
    keep[child] = dfa.table[child] != dfa.table[parent[child]]
    counts = keep.sum(axis=1)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    rows, cols = np.nonzero(keep)
    return D2fa(m, offsets, cols.astype(np.int32), dfa.table[rows, cols],
                parent.astype(np.int32), dfa.start, dfa.accepting)


def first_mismatch(dfa: Dfa, d2fa: D2fa) -> tuple[int, int] | None:
    """A pair (u, c) where resolution disagrees with the DFA, or None."""
    if dfa.table.shape != (d2fa.state_count, d2fa.alphabet_size):
        raise D2faError("shape mismatch")
    if dfa.start != d2fa.start or dfa.accepting != d2fa.accepting:
        raise D2faError("shape mismatch: start or accepting states differ")
    dest, _ = K.resolve_all(d2fa.offsets, d2fa.chars, d2fa.targets, d2fa.default, d2fa.alphabet_size)
    bad = np.argwhere(dest != dfa.table)
    if bad.size == 0:
        return None
    return int(bad[0, 0]), int(bad[0, 1])


def verify_equivalent(dfa: Dfa, d2fa: D2fa) -> bool:
    """True iff every (state, character) resolves to the DFA's successor,
    which implies both automata accept the same language."""
    return first_mismatch(dfa, d2fa) is None


@dataclass
class CompressionReport:
    algorithm: str
    params: dict
    n: int
    alphabet_size: int
    labeled_before: int
    labeled_after: int
    default_count: int
    total_after: int
    compression_ratio: float
    longest_delay: int
    elapsed_ms: dict
    srg_edge_count: int

    @classmethod
    def of(cls, algorithm: str, params: dict, dfa: Dfa, d2fa: D2fa,
           elapsed_ms: dict, srg_edge_count: int) -> "CompressionReport":
        n, m = dfa.table.shape
        labeled = d2fa.labeled_count
        defaults = d2fa.default_count
        return cls(algorithm, dict(params), n, m, n * m, labeled, defaults, labeled + defaults,
                   (labeled + defaults) / (n * m), longest_delay(d2fa), dict(elapsed_ms),
                   srg_edge_count)


# --------------------------------------------------------------------------
# text format


def write_d2fa(d2fa: D2fa, path) -> None:
    acc = sorted(d2fa.accepting)
    offsets = d2fa.offsets.tolist()
    chars = d2fa.chars.tolist()
    targets = d2fa.targets.tolist()
    with open(path, "w") as fh:
        fh.write("D2FA 1\n")
        fh.write(f"states {d2fa.state_count}\n")
        fh.write(f"alphabet {d2fa.alphabet_size}\n")
        fh.write(f"start {d2fa.start}\n")
        fh.write(" ".join(["accept", str(len(acc))] + [str(a) for a in acc]) + "\n")
        for u, d in enumerate(d2fa.default.tolist()):
            lo, hi = offsets[u], offsets[u + 1]
            pairs = " ".join(f"{c}:{t}" for c, t in zip(chars[lo:hi], targets[lo:hi]))
            head = f"default {'-' if d < 0 else d} ;"
            fh.write(f"{head} {pairs}\n" if pairs else head + "\n")


def read_d2fa(path: str | os.PathLike) -> D2fa:
    with open(path) as fh:
        text = fh.read()
    lines = _content_lines(text)
    n, m, start, accepting = parse_header(lines, "D2FA", path)
    rows, defaults = [], []
    for lineno, line in lines:
        head, sep, body = line.partition(";")
        parts = head.split()
        if not sep or len(parts) != 2 or parts[0] != "default":
            raise DfaFormatError(f"{path}:{lineno}: expected 'default <id|-> ; pairs'")
        if parts[1] == "-":
            defaults.append(None)
        else:
            try:
                defaults.append(int(parts[1]))
            except ValueError:
                raise DfaFormatError(f"{path}:{lineno}: malformed default {parts[1]!r}") from None
        row = {}
        for pair in body.split():
            c, colon, t = pair.partition(":")
            try:
                row[int(c)] = int(t)
            except ValueError:
                raise DfaFormatError(f"{path}:{lineno}: malformed transition {pair!r}") from None
            if not colon:
                raise DfaFormatError(f"{path}:{lineno}: malformed transition {pair!r}")
        rows.append(row)
    if len(rows) != n:
        raise DfaFormatError(f"{path}: truncated table: {len(rows)} of {n} rows")
    try:
        return D2fa.from_rows(m, rows, defaults, start, accepting)
    except D2faError as exc:
        raise DfaFormatError(f"{path}: {exc}") from None
