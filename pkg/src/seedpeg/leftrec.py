"""Left recursion by seed growing, the escape hatch, and standalone precedence."""

from __future__ import annotations

from .engine import FAILED, register
from .expr import Kind


@register(Kind.LEFT_RECURSIVE)
def compile_left_recursive(state, node, kids, fail):
    """Grow a seed at each position until the operand stops consuming more.

    Left-associative nodes add themselves to ``blocked`` while growing, so
    only the left-position recursion (served from the seed) can succeed.
    """
    counts = state.counters
    seeds = state.seeds
    blocked = state.blocked
    nodes = state.nodes
    i = node.id
    (operand,) = kids
    left_assoc = node["left_assoc"]

    def left_recursive(pos):
        counts[i] += 1
        key = (pos, i)
        seed = seeds.get(key)
        if seed is not None:
            end, produced = seed
            if end < 0:
                fail(i, pos)
            elif produced:
                nodes.extend(produced)
            return end
        if i in blocked:
            fail(i, pos)
            return -1

        cur_end, cur_nodes = -1, ()
        seeds[key] = FAILED
        if len(seeds) > state.peak_seeds:
            state.peak_seeds = len(seeds)
        if left_assoc:
            blocked.add(i)
        state.suppress += 1
        mark = len(nodes)
        try:
            while True:
                end = operand(pos)
                if end > cur_end:
                    cur_end = end
                    cur_nodes = tuple(nodes[mark:])
                    del nodes[mark:]
                    seeds[key] = (cur_end, cur_nodes)
                else:
                    del nodes[mark:]
                    break
        finally:
            del seeds[key]
            if left_assoc:
                blocked.discard(i)
            state.suppress -= 1
        if cur_end < 0:
            fail(i, pos)
        elif cur_nodes:
            nodes.extend(cur_nodes)
        return cur_end
    return left_recursive


@register(Kind.ESCAPE_LEFT_BLOCK)
def compile_escape(state, node, kids, fail):
    """Parse the operand with recursion restrictions lifted, restoring them afterwards.

    The blocked set is emptied, and so are the cluster precedences: a
    bracketed subexpression re-entering a cluster starts at precedence 0
    instead of inheriting the group that reached the bracket.
    """
    counts = state.counters
    blocked = state.blocked
    precedences = state.precedences
    depth = state.cluster_depth
    i = node.id
    (operand,) = kids

    def escape(pos):
        counts[i] += 1
        if not blocked and not precedences:
            end = operand(pos)
        else:
            saved = set(blocked), dict(precedences), dict(depth)
            blocked.clear()
            precedences.clear()
            depth.clear()
            try:
                end = operand(pos)
            finally:
                for live, old in zip((blocked, precedences, depth), saved):
                    live.clear()
                    live.update(old)
        if end < 0:
            fail(i, pos)
        return end
    return escape


@register(Kind.PRECEDENCE)
def compile_precedence(state, node, kids, fail):
    """Fail if the current precedence exceeds this level, else raise it for the operand."""
    counts = state.counters
    i = node.id
    (operand,) = kids
    level = node["level"]

    def precedence(pos):
        counts[i] += 1
        saved = state.current_precedence
        if level < saved:
            fail(i, pos)
            return -1
        state.current_precedence = level
        try:
            end = operand(pos)
        finally:
            state.current_precedence = saved
        if end < 0:
            fail(i, pos)
        return end
    return precedence
