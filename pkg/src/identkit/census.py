"""Exhaustive census of labeled digraphs by identifiability configuration.

For every labeled simple digraph with n vertices and m edges (no self-loops)
the census counts, with leaks in every compartment and generic diagonal
parameters:

* strongly connected graphs;
* graphs reaching expected dimension for input {1} = output {1} (SC);
* ... for input {1}, outputs {2,3} (SC);
* strongly input-output connected graphs for input {1}, output {2},
  and those reaching expected dimension;
* the same for inputs {1,3}, output {2}.

A cell is NA when its configuration is impossible at (n, m): strong
connectivity needs m >= n, strong input-output connectivity needs
m >= n-1, and an expected-dimension cell is NA when |E| + |In u Out|
exceeds the largest possible coefficient count over all admissible
input-output distances.

Counting is deterministic for a fixed seed regardless of worker count: each
graph owns an RNG stream derived from (seed, graph index), and aggregation
is plain addition.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from itertools import combinations, islice
from multiprocessing import Pool

from . import graphprops
from .identcore import derived_rng, random_prime_62, rank_mod_p
from .model import make_model, compartmental_matrix
from .sympoly import EvalPoint, SparsePoly, char_poly_coeffs, signed_minor_coeffs

DEFAULT_TRIALS = 3
CHECKPOINT_EVERY = 10_000
VALUE_BOUND = 10_000

CELLS = (
    "strongly_connected",
    "expdim_in1_out1",
    "expdim_in1_out23",
    "sioc_in1_out2",
    "expdim_in1_out2",
    "sioc_in13_out2",
    "expdim_in13_out2",
)

CSV_HEADER = ("n", "m", "total") + CELLS


@dataclass(frozen=True)
class CensusRow:
    n: int
    m: int
    total: int
    strongly_connected: int | None
    expdim_in1_out1: int | None
    expdim_in1_out23: int | None
    sioc_in1_out2: int | None
    expdim_in1_out2: int | None
    sioc_in13_out2: int | None
    expdim_in13_out2: int | None

    def cells(self) -> dict[str, int | None]:
        return {name: getattr(self, name) for name in CELLS}

    def csv_record(self) -> list[str]:
        vals = [self.n, self.m, self.total] + [self.cells()[name] for name in CELLS]
        return ["NA" if v is None else str(v) for v in vals]


def edge_slots(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]


def total_graphs(n: int, m: int) -> int:
    return math.comb(n * (n - 1), m)


def enumerate_graphs(n: int, m: int, start: int = 0, stop: int | None = None):
    """Edge sets of all labeled digraphs (n, m) in lexicographic slot order;
    optionally only ranks [start, stop)."""
    if not 0 <= m <= n * (n - 1):
        raise ValueError(f"m={m} outside 0..{n*(n-1)}")
    gen = combinations(edge_slots(n), m)
    return islice(gen, start, stop)


def row_feasibility(n: int, m: int) -> dict[str, bool]:
    """Which cells are structurally possible at (n, m)."""
    sc_ok = n == 1 or m >= n
    sioc_ok = m >= n - 1
    return {
        "strongly_connected": sc_ok,
        "expdim_in1_out1": sc_ok and m + 1 <= 2 * n - 1,
        "expdim_in1_out23": n >= 3 and sc_ok and m + 3 <= 3 * n - 2,
        "sioc_in1_out2": n >= 2 and sioc_ok,
        "expdim_in1_out2": n >= 2 and sioc_ok and m + 2 <= 2 * n - 1,
        "sioc_in13_out2": n >= 3 and sioc_ok,
        "expdim_in13_out2": n >= 3 and sioc_ok and m + 3 <= 3 * n - 2,
    }


# -- per-graph evaluation -----------------------------------------------


def _nonzero_rows(polys) -> list[SparsePoly]:
    return [p for p in polys if p.terms]


def _evaluate_graph(
    n: int, edges: tuple[tuple[int, int], ...], rng, feas: dict[str, bool], trials: int
) -> dict[str, bool]:
    """Classification bits for one graph; keys follow CELLS."""
    m = len(edges)
    out: dict[str, bool] = {name: False for name in CELLS}

    sc = graphprops.strongly_connected_raw(n, edges)
    out["strongly_connected"] = sc
    sioc12 = sioc132 = False
    if feas["sioc_in1_out2"]:
        sioc12 = graphprops.strongly_connected_raw(n, edges + ((2, 1),))
        out["sioc_in1_out2"] = sioc12
    if feas["sioc_in13_out2"]:
        sioc132 = graphprops.strongly_connected_raw(n, edges + ((2, 1), (2, 3)))
        out["sioc_in13_out2"] = sioc132

    # (config key, active?, minor positions, rank bound)
    configs = [
        ("expdim_in1_out1", feas["expdim_in1_out1"] and sc, ((1, 1),), m + 1),
        ("expdim_in1_out23", feas["expdim_in1_out23"] and sc, ((1, 2), (1, 3)), m + 3),
        ("expdim_in1_out2", feas["expdim_in1_out2"] and sioc12, ((1, 2),), m + 2),
        ("expdim_in13_out2", feas["expdim_in13_out2"] and sioc132, ((1, 2), (3, 2)), m + 3),
    ]
    active = [cfg for cfg in configs if cfg[1]]
    if not active:
        return out

    model = make_model(n, edges, {1}, {1}, range(1, n + 1))
    matrix = compartmental_matrix(model, "diag")
    entries = matrix.entries
    table = matrix.table
    nparams = len(table.params)

    lhs = _nonzero_rows(char_poly_coeffs(entries, table))
    minor_rows: dict[tuple[int, int], list[SparsePoly]] = {}
    for _, _, positions, _ in active:
        for pos in positions:
            if pos not in minor_rows:
                minor_rows[pos] = _nonzero_rows(signed_minor_coeffs(entries, table, *pos))

    # distinct jacobian rows shared across configurations
    row_ids: dict[SparsePoly, int] = {}
    rows: list[SparsePoly] = []

    def intern(poly: SparsePoly) -> int:
        rid = row_ids.get(poly)
        if rid is None:
            rid = len(rows)
            row_ids[poly] = rid
            rows.append(poly)
        return rid

    lhs_ids = [intern(p) for p in lhs]
    config_rows: list[tuple[str, list[int], int]] = []
    for name, _, positions, bound in active:
        ids = set(lhs_ids)
        for pos in positions:
            ids.update(intern(p) for p in minor_rows[pos])
        config_rows.append((name, sorted(ids), bound))

    partials = [[poly.partial_by_index(c) for c in range(nparams)] for poly in rows]
    best = {name: 0 for name, _, _ in config_rows}
    for _ in range(trials):
        if all(best[name] >= bound for name, _, bound in config_rows):
            break
        p = random_prime_62(rng)
        vals = []
        for _ in range(nparams):
            v = 0
            while v == 0:
                v = rng.randint(-VALUE_BOUND, VALUE_BOUND)
            vals.append(v)
        point = EvalPoint(table=table, values=tuple(vals), modulus=p)
        evaluated = [[q.evaluate(point) for q in vec] for vec in partials]
        for name, ids, bound in config_rows:
            if best[name] >= bound:
                continue
            rank = rank_mod_p([evaluated[r] for r in ids], p)
            if rank > bound:
                raise AssertionError(
                    f"rank {rank} exceeds bound {bound} for {name} on edges {edges}"
                )
            best[name] = max(best[name], rank)
    for name, _, bound in config_rows:
        out[name] = best[name] == bound
    return out


def _eval_chunk(args) -> list[int]:
    n, m, start, stop, seed, trials = args
    feas = row_feasibility(n, m)
    counts = [0] * len(CELLS)
    for offset, edges in enumerate(enumerate_graphs(n, m, start, stop)):
        idx = start + offset
        rng = derived_rng(seed, "census", f"{n}:{m}:{idx}")
        bits = _evaluate_graph(n, edges, rng, feas, trials)
        for pos, name in enumerate(CELLS):
            if bits[name]:
                counts[pos] += 1
    return counts


# -- row and table drivers ------------------------------------------------


def census_row(
    n: int,
    m: int,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    jobs: int = 1,
    checkpoint_path: str | None = None,
    progress=None,
) -> CensusRow:
    """Count all graphs at (n, m).

    With a checkpoint path, partial counts are flushed every
    ``CHECKPOINT_EVERY`` graphs and an interrupted run resumes from the last
    flush (the file must match n, m, and seed).
    """
    total = total_graphs(n, m)
    feas = row_feasibility(n, m)
    counts = [0] * len(CELLS)
    next_index = 0

    if checkpoint_path and os.path.exists(checkpoint_path):
        with open(checkpoint_path, "r", encoding="utf-8") as fh:
            state = json.load(fh)
        if state["n"] == n and state["m"] == m and state["seed"] == seed:
            counts = list(state["counts"])
            next_index = state["next_index"]

    block = CHECKPOINT_EVERY
    while next_index < total:
        stop = min(next_index + block, total)
        if jobs > 1:
            step = max(1, (stop - next_index + jobs - 1) // jobs)
            tasks = [
                (n, m, s, min(s + step, stop), seed, trials)
                for s in range(next_index, stop, step)
            ]
            with Pool(jobs) as pool:
                for part in pool.map(_eval_chunk, tasks):
                    counts = [a + b for a, b in zip(counts, part)]
            pool.join()
        else:
            part = _eval_chunk((n, m, next_index, stop, seed, trials))
            counts = [a + b for a, b in zip(counts, part)]
        next_index = stop
        if checkpoint_path:
            tmp = checkpoint_path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(
                    {"n": n, "m": m, "seed": seed, "next_index": next_index, "counts": counts},
                    fh,
                )
            os.replace(tmp, checkpoint_path)
        if progress:
            progress(n, m, next_index, total)

    cells = {
        name: (counts[pos] if feas[name] else None) for pos, name in enumerate(CELLS)
    }
    return CensusRow(n=n, m=m, total=total, **cells)


def census_table(
    n: int,
    m_values,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    jobs: int = 1,
    checkpoint_dir: str | None = None,
    progress=None,
) -> list[CensusRow]:
    rows = []
    for m in m_values:
        path = None
        if checkpoint_dir:
            os.makedirs(checkpoint_dir, exist_ok=True)
            path = os.path.join(checkpoint_dir, f"census_{n}_{m}_{seed}.json")
        rows.append(
            census_row(n, m, seed=seed, trials=trials, jobs=jobs, checkpoint_path=path, progress=progress)
        )
    return rows


def write_csv(rows: list[CensusRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_record())


def write_sidecar(
    rows: list[CensusRow], path: str, seed: int, trials: int, runtime_seconds: float
) -> None:
    doc = {
        "seed": seed,
        "trials": trials,
        "runtime_seconds": runtime_seconds,
        "rows": [
            {"n": r.n, "m": r.m, "total": r.total, **r.cells()}
            for r in rows
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def cell_members(n: int, m: int, cell: str, seed: int = 0, trials: int = DEFAULT_TRIALS):
    """Graph indices (and edge sets) counted in one cell; debugging aid for
    discrepancy reports."""
    if cell not in CELLS:
        raise ValueError(f"unknown cell {cell!r}")
    feas = row_feasibility(n, m)
    hits = []
    for idx, edges in enumerate(enumerate_graphs(n, m)):
        rng = derived_rng(seed, "census", f"{n}:{m}:{idx}")
        bits = _evaluate_graph(n, edges, rng, feas, trials)
        if bits[cell]:
            hits.append((idx, edges))
    return hits


def discrepancy_report(
    n: int,
    m: int,
    cell: str,
    expected: int,
    seeds=(0, 1, 2),
    trials: int = DEFAULT_TRIALS,
    sample: int = 50,
) -> dict:
    """Evidence bundle for a cell that disagrees with a reference count.

    Re-counts the cell under several independent seeds and lists sample member
    graphs with their per-seed membership, so a stable disagreement can be
    distinguished from a random-evaluation artifact.
    """
    per_seed_members = {}
    for s in seeds:
        per_seed_members[s] = {idx: edges for idx, edges in cell_members(n, m, cell, seed=s, trials=trials)}
    counts = {s: len(v) for s, v in per_seed_members.items()}
    union = sorted(set().union(*per_seed_members.values()))
    unstable = [
        idx for idx in union if not all(idx in per_seed_members[s] for s in seeds)
    ]
    base = per_seed_members[seeds[0]]
    return {
        "n": n,
        "m": m,
        "cell": cell,
        "expected": expected,
        "counts_by_seed": {str(s): counts[s] for s in seeds},
        "stable_across_seeds": not unstable,
        "seed_unstable_graphs": unstable,
        "sample_members": [
            {"index": idx, "edges": [list(e) for e in base[idx]]}
            for idx in sorted(base)[:sample]
        ],
    }
