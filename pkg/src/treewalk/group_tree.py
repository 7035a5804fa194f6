"""Free products of Z/2Z and Z factors and their Cayley trees.

A group element is a reduced word, stored as a tuple of integer letter
codes.  The group acts on its Cayley tree by left multiplication, so the
vertex set is the set of reduced words and ``w`` is joined to ``w*s`` for
every generator letter ``s``.
"""
from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

Word = tuple[int, ...]
IDENTITY: Word = ()


class GroupSpec:
    """Presentation ``Z2 * ... * Z2 * Z * ... * Z`` with named generators.

    Parameters
    ----------
    involutions : sequence of str
        Names of the order-two generators.
    free : sequence of str
        Names of the infinite-order generators.  The inverse of ``x`` is
        written ``x^``.
    """

    def __init__(self, involutions: Sequence[str] = (), free: Sequence[str] = ()):
        involutions = tuple(involutions)
        free = tuple(free)
        names = involutions + free
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for name in names:
            if not name or "^" in name or name in ("e", "1"):
                raise ValueError(f"invalid generator name {name!r}")
        symbols: list[str] = []
        inverse: list[int] = []
        for name in involutions:
            inverse.append(len(symbols))
            symbols.append(name)
        for name in free:
            code = len(symbols)
            symbols += [name, name + "^"]
            inverse += [code + 1, code]
        self.involutions = involutions
        self.free = free
        self.symbols = tuple(symbols)
        self._inv = tuple(inverse)
        self._code = {s: i for i, s in enumerate(symbols)}
        self.letters: tuple[int, ...] = tuple(range(len(symbols)))
        if self.valence < 3:
            raise ValueError("valence < 3")
        self._ball_cache: dict[int, tuple[Word, ...]] = {}

    def __repr__(self) -> str:
        return f"GroupSpec(involutions={self.involutions!r}, free={self.free!r})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, GroupSpec) and self.involutions == other.involutions
                and self.free == other.free)

    def __hash__(self) -> int:
        return hash((self.involutions, self.free))

    @property
    def valence(self) -> int:
        return len(self.symbols)

    # -- words ---------------------------------------------------------

    def letter_inverse(self, code: int) -> int:
        return self._inv[code]

    def reduce(self, letters: Iterable) -> Word:
        """Freely reduce a raw sequence of letter codes or symbols."""
        out: list[int] = []
        inv = self._inv
        for s in letters:
            code = self._code[s] if isinstance(s, str) else s
            if not isinstance(code, int) or not 0 <= code < len(inv):
                raise ValueError(f"unknown letter {s!r}")
            if out and out[-1] == inv[code]:
                out.pop()
            else:
                out.append(code)
        return tuple(out)

    def parse(self, text: str) -> Word:
        """Parse a word such as ``"ab"``, ``"s t^"`` or ``"e"``.

        Generator names are matched greedily, longest first; whitespace and
        ``*`` are separators.
        """
        text = text.strip()
        if text in ("", "e", "1", "ε"):
            return IDENTITY
        names = sorted(self.symbols, key=len, reverse=True)
        raw: list[str] = []
        i = 0
        while i < len(text):
            if text[i] in " *.\t":
                i += 1
                continue
            for name in names:
                if text.startswith(name, i):
                    raw.append(name)
                    i += len(name)
                    break
            else:
                raise ValueError(f"cannot parse word {text!r} at position {i}")
        return self.reduce(raw)

    def format(self, w: Word) -> str:
        if not w:
            return "e"
        sep = "" if all(len(self.symbols[c].rstrip("^")) == 1 for c in w) else " "
        return sep.join(self.symbols[c] for c in w)

    def inverse(self, w: Word) -> Word:
        inv = self._inv
        return tuple(inv[c] for c in reversed(w))

    def multiply(self, u: Word, v: Word) -> Word:
        inv = self._inv
        i, j = len(u), 0
        while i > 0 and j < len(v) and v[j] == inv[u[i - 1]]:
            i -= 1
            j += 1
        return u[:i] + v[j:]

    # -- tree geometry -------------------------------------------------

    @staticmethod
    def _common_prefix(u: Word, v: Word) -> int:
        n = min(len(u), len(v))
        i = 0
        while i < n and u[i] == v[i]:
            i += 1
        return i

    def distance(self, u: Word, v: Word) -> int:
        c = self._common_prefix(u, v)
        return len(u) + len(v) - 2 * c

    def point_on_geodesic(self, u: Word, v: Word, t: int) -> Word:
        """Vertex of ``[u, v]`` at distance ``t`` from ``u``."""
        c = self._common_prefix(u, v)
        up = len(u) - c
        if not 0 <= t <= up + len(v) - c:
            raise ValueError("t outside geodesic")
        if t <= up:
            return u[: len(u) - t]
        return v[: c + t - up]

    def geodesic(self, u: Word, v: Word) -> tuple[Word, ...]:
        d = self.distance(u, v)
        return tuple(self.point_on_geodesic(u, v, t) for t in range(d + 1))

    def on_geodesic(self, p: Word, u: Word, v: Word) -> bool:
        return self.distance(u, p) + self.distance(p, v) == self.distance(u, v)

    def neighbors(self, w: Word) -> tuple[Word, ...]:
        return tuple(self.multiply(w, (s,)) for s in self.letters)

    def words_up_to(self, r: int) -> tuple[Word, ...]:
        """All reduced words of length at most ``r``, in shortlex order."""
        if r not in self._ball_cache:
            out: list[Word] = [IDENTITY]
            layer = [IDENTITY]
            for _ in range(r):
                nxt = []
                for w in layer:
                    last = self._inv[w[-1]] if w else None
                    for s in self.letters:
                        if s != last:
                            nxt.append(w + (s,))
                out += nxt
                layer = nxt
            self._ball_cache[r] = tuple(out)
        return self._ball_cache[r]

    def ball(self, y: Word, r: int) -> tuple[Word, ...]:
        if r < 0:
            return ()
        return tuple(self.multiply(y, w) for w in self.words_up_to(r))

    def sphere(self, y: Word, r: int) -> tuple[Word, ...]:
        if r < 0:
            return ()
        return tuple(self.multiply(y, w) for w in self.words_up_to(r) if len(w) == r)

    def shadow_contains(self, x: Word, y: Word, v: Word) -> bool:
        """True if ``v`` lies in the half-tree seen from ``y`` through ``x``.

        ``x`` and ``y`` must be adjacent; the half-tree is the set of
        vertices whose geodesic to ``y`` passes through ``x``.
        """
        if self.distance(x, y) != 1:
            raise ValueError("shadow needs adjacent vertices")
        return self.distance(v, x) < self.distance(v, y)

    def is_visible(self, edge: tuple[Word, Word], target: tuple[Word, Word]) -> bool:
        """Whether the half-tree of ``edge`` is contained in that of ``target``."""
        x, y = edge
        x0, y0 = target
        return self.on_geodesic(y, x, y0) and self.on_geodesic(x0, x, y0)

    def find_visible_translate(self, edge: tuple[Word, Word],
                               target: tuple[Word, Word], max_radius: int = 64) -> Word:
        """Shortest ``g`` (shortlex first) with ``g*edge`` visible from ``target``."""
        x, y = edge
        for r in range(max_radius + 1):
            for g in self.words_up_to(r):
                if len(g) != r:
                    continue
                if self.is_visible((self.multiply(g, x), self.multiply(g, y)), target):
                    return g
        raise RuntimeError("no visible translate found")

    def canonicalize(self, vertices: Sequence[Word], anchor: int = -1):
        """Translate a tuple of vertices so that ``vertices[anchor]`` is the identity.

        Returns ``(canonical_tuple, g)`` with ``canonical = g * vertices``.
        """
        g = self.inverse(vertices[anchor])
        return tuple(self.multiply(g, v) for v in vertices), g


def shortlex_key(w: Word) -> tuple:
    return (len(w), w)


def bfs_path(start: Word, goal, neighbors, allowed=None, max_nodes: int = 10**6):
    """Breadth-first shortest path from ``start`` to a vertex satisfying ``goal``.

    ``neighbors(v)`` yields successors in a fixed order and ``allowed(v)``
    filters intermediate vertices (the goal vertex itself is not filtered).
    Returns the vertex list or ``None``.
    """
    parent = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in neighbors(v):
            if w in parent:
                continue
            parent[w] = v
            if goal(w):
                path = [w]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            if allowed is None or allowed(w):
                queue.append(w)
                if len(parent) > max_nodes:
                    return None
    return None
