"""Interned Cayley tree of a free group, for walk bookkeeping.

Each vertex of the tree (= reduced word) is materialized at most once per
tree, so object identity is vertex identity and nodes can key lamp dicts
directly. Nodes carry a skew-binary jump pointer giving O(log depth) level
ancestors and lowest common ancestors, which is what makes prefix and
distance queries on long trajectories affordable.
"""

from __future__ import annotations

from .base import Word


class TreeNode:
    __slots__ = ("letter", "parent", "depth", "jump", "children")

    def __init__(self, letter: int, parent: "TreeNode | None"):
        self.letter = letter
        self.parent = parent
        self.children: dict[int, TreeNode] | None = None
        if parent is None:
            self.depth = 0
            self.jump = self
        else:
            self.depth = parent.depth + 1
            j = parent.jump
            if j is not parent and parent.depth - j.depth == j.depth - j.jump.depth:
                self.jump = j.jump
            else:
                self.jump = parent

    def child(self, letter: int) -> "TreeNode":
        kids = self.children
        if kids is None:
            kids = self.children = {}
        node = kids.get(letter)
        if node is None:
            node = kids[letter] = TreeNode(letter, self)
        return node

    def step(self, letter: int) -> "TreeNode":
        """Multiply on the right by one generator letter."""
        if letter == -self.letter and self.parent is not None:
            return self.parent
        return self.child(letter)

    def walk(self, word: Word) -> "TreeNode":
        node = self
        for let in word:
            node = node.step(let)
        return node

    def word(self) -> Word:
        out = []
        node = self
        while node.parent is not None:
            out.append(node.letter)
            node = node.parent
        out.reverse()
        return tuple(out)

    def ancestor(self, depth: int) -> "TreeNode":
        node = self
        while node.depth > depth:
            node = node.jump if node.jump.depth >= depth else node.parent
        return node

    def is_ancestor_of(self, other: "TreeNode") -> bool:
        return other.depth >= self.depth and other.ancestor(self.depth) is self

    def __repr__(self):
        return f"TreeNode({self.word()!r})"


def new_tree() -> TreeNode:
    return TreeNode(0, None)


def lca(a: TreeNode, b: TreeNode) -> TreeNode:
    if a.depth > b.depth:
        a = a.ancestor(b.depth)
    elif b.depth > a.depth:
        b = b.ancestor(a.depth)
    while a is not b:
        if a.jump is not b.jump:
            a, b = a.jump, b.jump
        else:
            a, b = a.parent, b.parent
    return a


def tree_distance(a: TreeNode, b: TreeNode) -> int:
    return a.depth + b.depth - 2 * lca(a, b).depth
