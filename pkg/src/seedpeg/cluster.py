"""Expression clusters: one operator combining precedence, left recursion and associativity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import FAILED, register
from .expr import Expression, GrammarBuilder, GrammarError, Kind


class ClusterError(GrammarError):
    pass


@dataclass(frozen=True)
class ClusterGroup:
    precedence: int
    left_assoc: bool
    ops: tuple[int, ...]


def cluster_groups(node: Expression) -> list[ClusterGroup]:
    """Materialize a Cluster node's groups, highest precedence first."""
    groups, k = [], 0
    for prec, left, size in node["groups"]:
        groups.append(ClusterGroup(prec, left, node.children[k:k + size]))
        k += size
    return groups


def group_alternates(alternates: Iterable[tuple[int, int, bool]]) -> list[ClusterGroup]:
    """Group ``(expr id, increments, left_recur)`` alternates by precedence level.

    Precedence starts at 0 and each ``@+`` on an alternate raises it by one
    for that alternate and the ones after it. The first alternate of a level
    fixes the level's associativity.
    """
    levels: dict[int, list] = {}
    prec = 0
    for n, (expr, increments, left) in enumerate(alternates):
        if increments < 0:
            raise ClusterError(f"alternate {n + 1}: negative precedence increment")
        prec += int(increments)
        if prec == 0:
            raise ClusterError(f"alternate {n + 1} has precedence 0; the first alternate needs @+")
        if prec not in levels:
            levels[prec] = [bool(left), []]
        elif left and not levels[prec][0]:
            raise ClusterError(
                f"alternate {n + 1}: @left_recur must be given on the first alternate of level {prec}")
        levels[prec][1].append(expr)
    if not levels:
        raise ClusterError("cluster has no alternates")
    return [ClusterGroup(p, left, tuple(ops)) for p, (left, ops) in sorted(levels.items(), reverse=True)]


def cluster_from_alternates(builder: GrammarBuilder,
                            alternates: Sequence[tuple[int, int, bool]]) -> int:
    groups = group_alternates(alternates)
    return builder.cluster((g.precedence, g.left_assoc, g.ops) for g in groups)


@register(Kind.CLUSTER)
def compile_cluster(state, node, kids, fail):
    counts = state.counters
    seeds = state.seeds
    precedences = state.precedences
    depth = state.cluster_depth
    nodes = state.nodes
    i = node.id
    groups = []
    k = 0
    for prec, left, size in node["groups"]:
        groups.append((prec, prec + (1 if left else 0), tuple(kids[k:k + size])))
        k += size
    groups = tuple(groups)

    def cluster(pos):
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

        cur_end, cur_nodes = -1, ()
        seeds[key] = FAILED
        if len(seeds) > state.peak_seeds:
            state.peak_seeds = len(seeds)
        entry_prec = precedences.get(i)
        min_prec = 0 if entry_prec is None else entry_prec
        depth[i] = depth.get(i, 0) + 1
        state.suppress += 1
        mark = len(nodes)
        try:
            grown = True
            while grown:
                grown = False
                for prec, blocking, ops in groups:
                    if prec < min_prec:
                        break
                    precedences[i] = blocking
                    for op in ops:
                        end = op(pos)
                        if end > cur_end:
                            cur_end = end
                            cur_nodes = tuple(nodes[mark:])
                            del nodes[mark:]
                            seeds[key] = (cur_end, cur_nodes)
                            grown = True
                            break
                        if end >= 0:
                            del nodes[mark:]
                    if grown:
                        break
        finally:
            del seeds[key]
            state.suppress -= 1
            left = depth[i] - 1
            if left:
                depth[i] = left
                # an enclosing invocation still relies on the value it set
                precedences[i] = entry_prec
            else:
                del depth[i]
                precedences.pop(i, None)
        if cur_end < 0:
            fail(i, pos)
        elif cur_nodes:
            nodes.extend(cur_nodes)
        return cur_end
    return cluster
