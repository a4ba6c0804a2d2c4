"""Rooted plane trees stored as preorder child lists."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .lattice_paths import LatticePath

DEFAULT_ENUM_CAP = 12


class PlaneTree:
    """Immutable plane tree. Node 0 is the root, nodes are numbered in
    depth-first preorder and ``children[v]`` lists v's children left to right."""

    __slots__ = ("children", "__dict__")

    def __init__(self, children):
        children = tuple(tuple(int(c) for c in ch) for ch in children)
        if not children:
            raise ValueError("a tree has at least one node")
        # preorder check: walking the child lists depth-first must visit 0, 1, 2, ...
        expected = 0
        stack = [0]
        seen = 0
        while stack:
            v = stack.pop()
            if v != expected:
                raise ValueError("child lists are not in preorder")
            expected += 1
            seen += 1
            stack.extend(reversed(children[v]))
        if seen != len(children):
            raise ValueError("child lists do not describe a single rooted tree")
        self.children = children

    # construction / serialization

    @classmethod
    def from_parens(cls, text: str) -> "PlaneTree":
        text = text.strip()
        if not text or text[0] != "(":
            raise ValueError("tree string must start with '('")
        children: list[list[int]] = []
        stack: list[int] = []
        done = False
        for pos, ch in enumerate(text):
            if done:
                raise ValueError(f"trailing characters at position {pos}")
            if ch == "(":
                v = len(children)
                children.append([])
                if stack:
                    children[stack[-1]].append(v)
                stack.append(v)
            elif ch == ")":
                if not stack:
                    raise ValueError(f"unbalanced ')' at position {pos}")
                stack.pop()
                done = not stack
            else:
                raise ValueError(f"unexpected character {ch!r}")
        if stack:
            raise ValueError("unbalanced '('")
        return cls(children)

    def to_parens(self) -> str:
        out = []
        stack: list[object] = [0]
        while stack:
            v = stack.pop()
            if v == ")":
                out.append(")")
                continue
            out.append("(")
            stack.append(")")
            stack.extend(reversed(self.children[v]))
        return "".join(out)

    @classmethod
    def from_depths(cls, depths) -> "PlaneTree":
        """Build from the preorder list of node depths."""
        depths = list(depths)
        if not depths or depths[0] != 0:
            raise ValueError("depth sequence must start with the root at depth 0")
        children: list[list[int]] = [[] for _ in depths]
        path = [0]
        for v in range(1, len(depths)):
            d = depths[v]
            if d < 1 or d > len(path):
                raise ValueError(f"invalid depth {d} at node {v}")
            del path[d:]
            children[path[-1]].append(v)
            path.append(v)
        return cls(children)

    @classmethod
    def star(cls, n: int) -> "PlaneTree":
        return cls([list(range(1, n))] + [[] for _ in range(n - 1)])

    @classmethod
    def path(cls, n: int) -> "PlaneTree":
        return cls([[v + 1] for v in range(n - 1)] + [[]])

    def __len__(self) -> int:
        return len(self.children)

    @property
    def size(self) -> int:
        return len(self.children)

    def __eq__(self, other) -> bool:
        return isinstance(other, PlaneTree) and self.children == other.children

    def __hash__(self) -> int:
        return hash(self.children)

    def __lt__(self, other: "PlaneTree") -> bool:
        return (self.size, self.to_parens()) < (other.size, other.to_parens())

    def __repr__(self) -> str:
        return f"PlaneTree({self.to_parens()!r})"

    @cached_property
    def depths(self) -> list[int]:
        d = [0] * self.size
        for v, ch in enumerate(self.children):
            for c in ch:
                d[c] = d[v] + 1
        return d


@dataclass(frozen=True)
class TreeStats:
    height: int
    width: int
    root_degree: int
    generation_sizes: tuple[int, ...]


def stats(t: PlaneTree) -> TreeStats:
    gens = [0] * (max(t.depths) + 1)
    for d in t.depths:
        gens[d] += 1
    return TreeStats(height=len(gens) - 1, width=max(gens),
                     root_degree=len(t.children[0]), generation_sizes=tuple(gens))


def height(t: PlaneTree) -> int:
    return max(t.depths)


def ball(t: PlaneTree, radius: int) -> PlaneTree:
    """The subtree spanned by nodes at depth <= radius, child order kept."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return PlaneTree.from_depths(d for d in t.depths if d <= radius)


def to_contour(t: PlaneTree) -> LatticePath:
    """Depth-first contour (2n-2 steps) followed by a final down step to -1."""
    steps: list[int] = []
    stack: list[tuple[int, int]] = [(0, 0)]
    while stack:
        v, i = stack.pop()
        ch = t.children[v]
        if i < len(ch):
            stack.append((v, i + 1))
            steps.append(1)
            stack.append((ch[i], 0))
        elif v != 0:
            steps.append(-1)
    steps.append(-1)
    return LatticePath(0, tuple(steps))


def from_contour(c: LatticePath) -> PlaneTree:
    if not c.is_excursion():
        raise ValueError("contour must be an excursion from 0 ending at -1")
    depths = [0]
    y = 0
    for s in c.steps[:-1]:
        y += s
        if s > 0:
            depths.append(y)
    return PlaneTree.from_depths(depths)


def enumerate_trees(n: int, cap: int = DEFAULT_ENUM_CAP) -> list[PlaneTree]:
    """All plane trees with n nodes, each once, ordered by their parens string."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {cap}")

    # a tree is "(" + forest + ")", a forest of k nodes is a sequence of trees
    forests: list[list[str]] = [[""]]
    for k in range(1, n):
        out = []
        for first in range(1, k + 1):
            for head in _trees(first, forests):
                for tail in forests[k - first]:
                    out.append(head + tail)
        forests.append(out)
    return [PlaneTree.from_parens(s) for s in sorted(_trees(n, forests))]


def _trees(n: int, forests: list[list[str]]) -> list[str]:
    return ["(" + f + ")" for f in forests[n - 1]]
