"""Graph-structural predicates for compartmental models.

All reachability work is done on integer bitmasks (bit v-1 stands for vertex
v), which keeps the per-graph cost low enough for exhaustive censuses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import CompartmentalModel, make_model


class CapExceeded(RuntimeError):
    """An enumeration or search grew past its configured cap."""


class PreconditionViolated(ValueError):
    pass


# -- bitmask primitives (plain n/edges arguments, shared with the census) ----


def out_masks(n: int, edges) -> list[int]:
    masks = [0] * n
    for s, d in edges:
        masks[s - 1] |= 1 << (d - 1)
    return masks


def in_masks(n: int, edges) -> list[int]:
    masks = [0] * n
    for s, d in edges:
        masks[d - 1] |= 1 << (s - 1)
    return masks


def closure_masks(masks: list[int]) -> list[int]:
    """Per-vertex reachability closure (not including the vertex itself
    unless it lies on a cycle)."""
    n = len(masks)
    reach = list(masks)
    for v in range(n):
        acc = reach[v]
        frontier = acc
        while frontier:
            new = 0
            rest = frontier
            while rest:
                low = rest & (-rest)
                new |= masks[low.bit_length() - 1]
                rest ^= low
            frontier = new & ~acc
            acc |= new
        reach[v] = acc
    return reach


def reachable_from(masks: list[int], start_mask: int) -> int:
    """All vertices reachable from the seed set (seed included)."""
    acc = start_mask
    frontier = start_mask
    while frontier:
        new = 0
        rest = frontier
        while rest:
            low = rest & (-rest)
            new |= masks[low.bit_length() - 1]
            rest ^= low
        frontier = new & ~acc
        acc |= new
    return acc


def strongly_connected_raw(n: int, edges) -> bool:
    if n == 1:
        return True
    fwd = out_masks(n, edges)
    full = (1 << n) - 1
    if reachable_from(fwd, 1) != full:
        return False
    bwd = in_masks(n, edges)
    return reachable_from(bwd, 1) == full


def weakly_connected_raw(n: int, edges) -> bool:
    sym = [0] * n
    for s, d in edges:
        sym[s - 1] |= 1 << (d - 1)
        sym[d - 1] |= 1 << (s - 1)
    return reachable_from(sym, 1) == (1 << n) - 1


def induced_strongly_connected(masks: list[int], member_mask: int) -> bool:
    """Is the induced subgraph on ``member_mask`` strongly connected?"""
    count = member_mask.bit_count()
    if count <= 1:
        return True
    start = member_mask & (-member_mask)
    restricted = [masks[v] & member_mask for v in range(len(masks))]
    acc = start
    frontier = start
    while frontier:
        new = 0
        rest = frontier
        while rest:
            low = rest & (-rest)
            new |= restricted[low.bit_length() - 1]
            rest ^= low
        frontier = new & ~acc
        acc |= new
    if acc != member_mask:
        return False
    # backward pass within the subset
    back = [0] * len(masks)
    rest = member_mask
    while rest:
        low = rest & (-rest)
        v = low.bit_length() - 1
        outs = restricted[v]
        while outs:
            lo = outs & (-outs)
            back[lo.bit_length() - 1] |= low
            outs ^= lo
        rest ^= low
    acc = start
    frontier = start
    while frontier:
        new = 0
        rest = frontier
        while rest:
            low = rest & (-rest)
            new |= back[low.bit_length() - 1]
            rest ^= low
        frontier = new & ~acc
        acc |= new
    return acc == member_mask


# -- reachability cache -------------------------------------------------


@dataclass(frozen=True)
class ReachabilityCache:
    """Forward/backward reachability bitmasks and the SCC partition."""

    n: int
    forward: tuple[int, ...]  # forward[v-1]: vertices reachable from v (v included)
    backward: tuple[int, ...]  # backward[v-1]: vertices that reach v (v included)
    sccs: tuple[frozenset[int], ...]


def reachability(model: CompartmentalModel) -> ReachabilityCache:
    n = model.n
    fwd_step = out_masks(n, model.edges)
    bwd_step = in_masks(n, model.edges)
    fwd = [m | (1 << v) for v, m in enumerate(closure_masks(fwd_step))]
    bwd = [m | (1 << v) for v, m in enumerate(closure_masks(bwd_step))]
    seen: set[int] = set()
    sccs: list[frozenset[int]] = []
    for v in range(n):
        if v in seen:
            continue
        mask = fwd[v] & bwd[v]
        members = frozenset(b + 1 for b in range(n) if mask >> b & 1)
        seen.update(b for b in range(n) if mask >> b & 1)
        sccs.append(members)
    return ReachabilityCache(n=n, forward=tuple(fwd), backward=tuple(bwd), sccs=tuple(sccs))


# -- predicates on models -------------------------------------------------


def is_strongly_connected(model: CompartmentalModel) -> bool:
    return strongly_connected_raw(model.n, model.edges)


def output_reachable_set(model: CompartmentalModel, j: int) -> frozenset[int]:
    """Vertices with a directed path to output j (j itself included)."""
    if j not in model.outputs:
        raise PreconditionViolated(f"vertex {j} is not an output")
    bwd = in_masks(model.n, model.edges)
    mask = reachable_from(bwd, 1 << (j - 1))
    return frozenset(b + 1 for b in range(model.n) if mask >> b & 1)


def output_reachable_subgraph(model: CompartmentalModel, j: int) -> CompartmentalModel:
    """Induced submodel on the vertices that reach output j.

    Vertices are relabeled 1..k following their original ascending order
    (see ``subgraph_relabeling``).  In/Out/Leak are intersected; the induced
    input set may be empty when no input reaches j.
    """
    keep = sorted(output_reachable_set(model, j))
    relabel = {v: idx + 1 for idx, v in enumerate(keep)}
    keep_set = set(keep)
    return CompartmentalModel(
        n=len(keep),
        edges=tuple(
            sorted((relabel[s], relabel[d]) for s, d in model.edges if s in keep_set and d in keep_set)
        ),
        inputs=frozenset(relabel[v] for v in model.inputs if v in keep_set),
        outputs=frozenset(relabel[v] for v in model.outputs if v in keep_set),
        leaks=frozenset(relabel[v] for v in model.leaks if v in keep_set),
    )


def subgraph_relabeling(model: CompartmentalModel, j: int) -> dict[int, int]:
    """Old-label -> new-label map used by ``output_reachable_subgraph``."""
    keep = sorted(output_reachable_set(model, j))
    return {v: idx + 1 for idx, v in enumerate(keep)}


def is_output_connectable(model: CompartmentalModel) -> bool:
    """Every compartment has a directed path to some output."""
    bwd = in_masks(model.n, model.edges)
    seed = 0
    for j in model.outputs:
        seed |= 1 << (j - 1)
    return reachable_from(bwd, seed) == (1 << model.n) - 1


def is_output_connectable_to_every_output(model: CompartmentalModel) -> bool:
    bwd = in_masks(model.n, model.edges)
    full = (1 << model.n) - 1
    return all(reachable_from(bwd, 1 << (j - 1)) == full for j in model.outputs)


def dist(model: CompartmentalModel, i: int, j: int) -> int | float:
    """Length of the shortest directed path i -> j; math.inf if unreachable."""
    if i == j:
        return 0
    masks = out_masks(model.n, model.edges)
    target = 1 << (j - 1)
    acc = 1 << (i - 1)
    frontier = acc
    steps = 0
    while frontier:
        steps += 1
        new = 0
        rest = frontier
        while rest:
            low = rest & (-rest)
            new |= masks[low.bit_length() - 1]
            rest ^= low
        if new & target:
            return steps
        frontier = new & ~acc
        acc |= new
    return math.inf


def _edges_on_io_paths(model: CompartmentalModel) -> set[tuple[int, int]]:
    """Edges lying on at least one simple path from an input to an output."""
    adj: dict[int, list[int]] = {v: [] for v in model.vertices}
    for s, d in model.edges:
        adj[s].append(d)
    covered: set[tuple[int, int]] = set()
    all_edges = set(model.edges)
    outputs = model.outputs

    def extend(v: int, on_path: set[int], path_edges: list[tuple[int, int]]) -> None:
        if v in outputs and path_edges:
            covered.update(path_edges)
        if covered == all_edges:
            return
        for w in adj[v]:
            if w in on_path:
                continue
            on_path.add(w)
            path_edges.append((v, w))
            extend(w, on_path, path_edges)
            path_edges.pop()
            on_path.remove(w)

    for i in sorted(model.inputs):
        if covered == all_edges:
            break
        extend(i, {i}, [])
    return covered


def is_strongly_input_output_connected(model: CompartmentalModel) -> bool:
    """Connected, and every edge lies on a simple directed cycle or on a
    simple directed path from an input to an output."""
    if not weakly_connected_raw(model.n, model.edges):
        return False
    fwd = out_masks(model.n, model.edges)
    closure = closure_masks(fwd)
    pending = [e for e in model.edges if not closure[e[1] - 1] >> (e[0] - 1) & 1]
    if not pending:
        return True
    on_paths = _edges_on_io_paths(model)
    return all(e in on_paths for e in pending)


def sioc_via_augmentation(model: CompartmentalModel) -> bool:
    """Strong-connectivity test of the graph augmented with output->input
    edges; equivalent to the definitional check when |In| = 1 or |Out| = 1.

    This is the fast route used by the census.
    """
    if len(model.inputs) != 1 and len(model.outputs) != 1:
        raise PreconditionViolated("augmentation shortcut needs a single input or a single output")
    extra = [(j, i) for j in model.outputs for i in model.inputs if j != i]
    return strongly_connected_raw(model.n, tuple(model.edges) + tuple(extra))


def is_inductively_strongly_connected(
    model: CompartmentalModel, start: int, node_cap: int = 500_000
) -> tuple[bool, tuple[int, ...] | None]:
    """Does some vertex ordering starting at ``start`` keep every
    prefix-induced subgraph strongly connected?

    Explores prefix vertex-sets breadth-first (the SC property of a prefix
    depends only on the set, not the order), so at most 2^n states are
    visited; ``node_cap`` bounds the state count for larger graphs.
    """
    n = model.n
    if not 1 <= start <= n:
        raise PreconditionViolated(f"start vertex {start} outside 1..{n}")
    masks = out_masks(n, model.edges)
    full = (1 << n) - 1
    start_mask = 1 << (start - 1)
    parents: dict[int, tuple[int, int]] = {}
    level = {start_mask}
    visited = {start_mask}
    while level:
        if full in visited:
            break
        next_level: set[int] = set()
        for state in level:
            for v in range(n):
                bit = 1 << v
                if state & bit:
                    continue
                new = state | bit
                if new in visited:
                    continue
                if induced_strongly_connected(masks, new):
                    visited.add(new)
                    parents[new] = (state, v + 1)
                    next_level.add(new)
                    if len(visited) > node_cap:
                        raise CapExceeded(f"inductive-SC search exceeded {node_cap} states")
        level = next_level
    if full not in visited:
        return False, None
    order = []
    state = full
    while state != start_mask:
        state, v = parents[state]
        order.append(v)
    order.append(start)
    return True, tuple(reversed(order))


def satisfies_almost_isc(model: CompartmentalModel) -> bool:
    """Graph-only sufficient condition for the path/cycle certificate: single
    input i and output j, strongly input-output connected, exactly
    2|V|-(dist(i,j)+2) edges, no return path j -> i, and inductively strongly
    connected (started at i or at j) once the edge j -> i is added."""
    if len(model.inputs) != 1 or len(model.outputs) != 1:
        raise PreconditionViolated("requires a single input and a single output")
    (i,) = model.inputs
    (j,) = model.outputs
    if i == j:
        raise PreconditionViolated("requires distinct input and output compartments")
    if not is_strongly_input_output_connected(model):
        return False
    d = dist(model, i, j)
    if not isinstance(d, int) or len(model.edges) != 2 * model.n - (d + 2):
        return False
    if dist(model, j, i) != math.inf:
        return False
    augmented = make_model(
        model.n,
        tuple(model.edges) + ((j, i),),
        model.inputs,
        model.outputs,
        model.leaks,
    )
    for anchor in (i, j):
        ok, _ = is_inductively_strongly_connected(augmented, anchor)
        if ok:
            return True
    return False
