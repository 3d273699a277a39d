"""Syntax trees from capture expressions, and whitespace-skipping tokens."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .engine import register
from .expr import Kind


@dataclass(frozen=True)
class SyntaxNode:
    name: str
    start: int
    end: int
    text: str | None = None
    children: tuple["SyntaxNode", ...] = ()

    def walk(self) -> Iterable["SyntaxNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def to_dict(self) -> dict:
        d = {"name": self.name, "span": [self.start, self.end]}
        if self.text is not None:
            d["text"] = self.text
        d["children"] = [c.to_dict() for c in self.children]
        return d


@register(Kind.CAPTURE)
def compile_capture(state, node, kids, fail):
    counts = state.counters
    nodes = state.nodes
    text = state.input
    i = node.id
    (operand,) = kids
    name = node["name"]
    record = node["record_text"]
    trim = state.token_trim

    def capture(pos):
        counts[i] += 1
        mark = len(nodes)
        end = operand(pos)
        if end < 0:
            fail(i, pos)
            return -1
        children = tuple(nodes[mark:])
        del nodes[mark:]
        recorded = None
        if record:
            # trim trailing whitespace only when a token ended the match
            stop = trim.get(end, end)
            recorded = text[pos:stop if stop >= pos else end]
        nodes.append(SyntaxNode(name, pos, end, recorded, children))
        return end
    return capture


@register(Kind.TOKEN)
def compile_token(state, node, kids, fail):
    """Match the operand, then skip whitespace; a failed whitespace match is not an error."""
    counts = state.counters
    nodes = state.nodes
    i = node.id
    (operand,) = kids
    ws = state.whitespace_fn()
    trim = state.token_trim

    def token(pos):
        counts[i] += 1
        end = operand(pos)
        if end < 0:
            fail(i, pos)
            return -1
        state.nonws_watermark = stop = end
        if ws is not None:
            mark = len(nodes)
            while True:
                after = ws(end)
                if after <= end:
                    break
                end = after
            del nodes[mark:]
        trim[end] = stop
        state.nonws_watermark = stop
        return end
    return token


def _root(nodes) -> SyntaxNode | None:
    if isinstance(nodes, SyntaxNode):
        return nodes
    nodes = tuple(nodes)
    if len(nodes) == 1:
        return nodes[0]
    if not nodes:
        return None
    return SyntaxNode("root", nodes[0].start, nodes[-1].end, None, nodes)


def _sexpr(node: SyntaxNode) -> str:
    parts = [node.name]
    if node.text is not None:
        parts.append(json.dumps(node.text, ensure_ascii=False))
    parts.extend(_sexpr(c) for c in node.children)
    return "(" + " ".join(parts) + ")"


def serialize_tree(nodes, format: str = "sexpr") -> str:
    """Render a node or a list of top-level nodes.

    Several top-level nodes are wrapped in a synthetic ``root`` node; none at
    all renders as an empty ``root``.
    """
    if format not in ("sexpr", "json"):
        raise ValueError(f"unknown tree format {format!r}")
    root = _root(nodes)
    if format == "sexpr":
        return "(root)" if root is None else _sexpr(root)
    if root is None:
        return json.dumps({"name": "root", "span": [0, 0], "children": []})
    return json.dumps(root.to_dict(), ensure_ascii=False)
