"""Directed graphs with per-arc transmission probabilities, and the text formats.

Node ids are dense integers 0..N-1.  Inputs keyed by arbitrary labels get an
order-of-first-appearance label map.  Arcs are canonicalized to (target, source)
order at construction, so an arc id doubles as the arc's position in the
in-neighborhood CSR layout; every estimator in the package indexes per-arc
state by these arc ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphFormatError, InputError, InvariantViolation

MAX_ARCS = 2**31 - 1

# Sweep kernels write leave-one-out products through a bin-sorted permutation so
# that scattered writes stay inside one cache-sized window per bin.
_BIN_SPAN = 32768


def _as_index_array(values):
    arr = np.asarray(values, dtype=np.int64)
    return arr.reshape(-1)


class DirectedGraph:
    """Immutable adjacency structure over dense nodes and directed arcs.

    Attributes (all read-only by convention):
        node_count: number of nodes N
        src, dst:   int64 arrays of length A, sorted by (dst, src)
        b:          float64 transmission probability per arc, in [0, 1]
        in_offsets: int64 CSR offsets into arc ids grouped by target node
        rev:        int64 arc id of the opposite-direction arc, or -1
        labels:     optional tuple of the original node labels
    """

    def __init__(self, node_count, src, dst, b, labels=None, _skip_checks=False):
        src = _as_index_array(src)
        dst = _as_index_array(dst)
        b = np.asarray(b, dtype=np.float64).reshape(-1)
        if not (src.size == dst.size == b.size):
            raise InputError("src, dst and b must have equal lengths")
        if src.size > MAX_ARCS:
            raise InputError(f"arc count {src.size} exceeds supported maximum {MAX_ARCS}")

        order = np.lexsort((src, dst))
        src = np.ascontiguousarray(src[order])
        dst = np.ascontiguousarray(dst[order])
        b = np.ascontiguousarray(b[order])

        if not _skip_checks:
            self._validate(node_count, src, dst, b)

        self.node_count = int(node_count)
        self.src = src
        self.dst = dst
        self.b = b
        self.labels = tuple(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != self.node_count:
            raise InputError("label map length does not match node count")

        counts = np.bincount(dst, minlength=self.node_count) if dst.size else np.zeros(self.node_count, np.int64)
        self.in_offsets = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=self.in_offsets[1:])

        out_counts = np.bincount(src, minlength=self.node_count) if src.size else np.zeros(self.node_count, np.int64)
        self.out_offsets = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(out_counts, out=self.out_offsets[1:])
        self.out_arcs = np.argsort(src, kind="stable").astype(np.int64)

        self.rev = self._reverse_arcs(src, dst, self.node_count)
        self._build_sweep_layout()

    @staticmethod
    def _validate(node_count, src, dst, b):
        node_count = int(node_count)
        if node_count < 0:
            raise InputError("node count must be non-negative")
        if src.size:
            lo = min(src.min(), dst.min())
            hi = max(src.max(), dst.max())
            if lo < 0 or hi >= node_count:
                raise InputError(f"arc endpoint {lo if lo < 0 else hi} outside [0, {node_count})")
            if np.any(src == dst):
                bad = int(src[src == dst][0])
                raise InputError(f"self-loop on node {bad}")
            key = dst * node_count + src
            if np.unique(key).size != key.size:
                dup = np.sort(key)
                dup = dup[:-1][dup[1:] == dup[:-1]][0]
                raise InputError(f"duplicate arc {int(dup % node_count)} -> {int(dup // node_count)}")
        if b.size and (np.any(b < 0.0) or np.any(b > 1.0) or not np.all(np.isfinite(b))):
            raise InputError("transmission probabilities must lie in [0, 1]")

    @staticmethod
    def _reverse_arcs(src, dst, n):
        a = src.size
        if a == 0:
            return np.empty(0, dtype=np.int64)
        key_fwd = dst * n + src
        key_rev = src * n + dst
        # key_fwd is sorted already thanks to (dst, src) canonical order
        pos = np.searchsorted(key_fwd, key_rev)
        pos = np.clip(pos, 0, a - 1)
        return np.where(key_fwd[pos] == key_rev, pos, -1)

    def _build_sweep_layout(self):
        """Bin-sorted scatter schedule used by the message-update kernel.

        The new message of arc r = (j -> i) equals a function of the
        leave-one-out product computed at its reverse arc k = (i -> j), which
        lives at in-CSR position k.  Sorting the paired positions by bins of
        the written arc id keeps each bin's writes inside one window.
        """
        a = self.src.size
        paired = self.rev >= 0
        paired_pos = np.nonzero(paired)[0]
        bin_id = self.rev[paired_pos] // _BIN_SPAN
        order = np.argsort(bin_id, kind="stable")
        binned_pos = paired_pos[order]
        slot = np.full(a, paired_pos.size, dtype=np.int64)  # spare slot for unpaired
        slot[binned_pos] = np.arange(binned_pos.size)
        self._slot = slot.astype(np.int32)
        self._scatter_targets = self.rev[binned_pos].astype(np.int32)
        unpaired = np.nonzero(~paired)[0]
        self._unpaired = unpaired.astype(np.int32)
        self._unpaired_src = self.src[unpaired].astype(np.int32)

    @property
    def arc_count(self):
        return int(self.src.size)

    def in_degree(self):
        return np.diff(self.in_offsets)

    def out_degree(self):
        return np.diff(self.out_offsets)

    def degree(self):
        """Undirected degree: number of distinct neighbors per node."""
        deg = np.zeros(self.node_count, dtype=np.int64)
        u = np.minimum(self.src, self.dst)
        v = np.maximum(self.src, self.dst)
        if u.size:
            key = np.unique(u * self.node_count + v)
            np.add.at(deg, key // self.node_count, 1)
            np.add.at(deg, key % self.node_count, 1)
        return deg

    def undirected_edges(self):
        """Sorted unique (u, v) pairs with u < v, ignoring orientation."""
        if not self.src.size:
            return np.empty((0, 2), dtype=np.int64)
        u = np.minimum(self.src, self.dst)
        v = np.maximum(self.src, self.dst)
        key = np.unique(u * self.node_count + v)
        return np.stack([key // self.node_count, key % self.node_count], axis=1)

    def is_forest(self):
        edges = self.undirected_edges()
        if edges.shape[0] >= self.node_count and self.node_count > 0:
            return False
        parent = list(range(self.node_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in edges:
            ru, rv = find(int(u)), find(int(v))
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def has_symmetric_b(self):
        """True when every arc has a reverse arc carrying the same b."""
        if not self.src.size:
            return True
        if np.any(self.rev < 0):
            return False
        return bool(np.all(self.b == self.b[self.rev]))

    def subgraph_without_node(self, node):
        """Same node set, with every arc incident to `node` removed."""
        keep = (self.src != node) & (self.dst != node)
        return DirectedGraph(self.node_count, self.src[keep], self.dst[keep],
                             self.b[keep], labels=self.labels, _skip_checks=True)

    def subgraph_with_edges(self, edge_pairs):
        """Keep only arcs whose undirected pair {u, v} appears in edge_pairs."""
        wanted = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in edge_pairs}
        if not wanted:
            keep = np.zeros(self.src.size, dtype=bool)
        else:
            u = np.minimum(self.src, self.dst)
            v = np.maximum(self.src, self.dst)
            key = u * self.node_count + v
            wanted_keys = np.array(sorted(a * self.node_count + b for a, b in wanted))
            keep = np.isin(key, wanted_keys)
        return DirectedGraph(self.node_count, self.src[keep], self.dst[keep],
                             self.b[keep], labels=self.labels, _skip_checks=True)

    def label_of(self, node):
        return self.labels[node] if self.labels is not None else str(int(node))


@dataclass(frozen=True)
class InitialCondition:
    """Per-node initial activation probabilities; budget k is their sum."""

    p0: np.ndarray

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=np.float64).reshape(-1)
        if p0.size and (np.any(p0 < 0.0) or np.any(p0 > 1.0) or not np.all(np.isfinite(p0))):
            raise InputError("initial probabilities must lie in [0, 1]")
        object.__setattr__(self, "p0", p0)

    @property
    def budget(self):
        return float(self.p0.sum())

    @classmethod
    def from_seed_set(cls, node_count, seeds):
        p0 = np.zeros(int(node_count))
        for s in seeds:
            if not 0 <= int(s) < node_count:
                raise InputError(f"seed node {s} outside [0, {node_count})")
            p0[int(s)] = 1.0
        return cls(p0)

    @classmethod
    def zeros(cls, node_count):
        return cls(np.zeros(int(node_count)))


@dataclass(frozen=True)
class MarginalReport:
    """Activation marginals at one horizon plus their sum (the influence)."""

    t: float  # non-negative integer horizon, or math.inf
    marginals: np.ndarray
    sigma: float
    converged: bool | None = None
    sweeps: int | None = None
    residual: float | None = None
    trajectory: tuple = field(default=(), compare=False)

    def validate(self, p0=None):
        m = self.marginals
        n = m.size
        if np.any(m < 0.0) or np.any(m > 1.0):
            raise InvariantViolation("marginals outside [0, 1]")
        if abs(self.sigma - float(m.sum())) > 1e-12 * max(n, 1):
            raise InvariantViolation("sigma inconsistent with marginal sum")
        if p0 is not None and np.any(m < np.asarray(p0) - 1e-15):
            raise InvariantViolation("marginals fell below the initial condition")
        return self


def influence_from_marginals(report):
    """Influence value: the sum of the report's per-node marginals."""
    return float(np.asarray(report.marginals, dtype=np.float64).sum())


# ---------------------------------------------------------------------------
# Text formats.
#
# Graph file: UTF-8, '#' comments, optional headers '%mode directed|undirected'
# and '%nodes N'; data lines 'u v b' (directed) or 'u v b_uv [b_vu]'
# (undirected).  Fields split on whitespace and/or commas.  Initial-condition
# and per-node value files: lines 'node value'.
# ---------------------------------------------------------------------------

def _tokens(line):
    return line.replace(",", " ").split()


def _parse_prob(tok, line_no, what="probability"):
    try:
        val = float(tok)
    except ValueError:
        raise GraphFormatError(f"bad {what} {tok!r}", line=line_no) from None
    if not (0.0 <= val <= 1.0) or not math.isfinite(val):
        raise GraphFormatError(f"{what} {val} outside [0, 1]", line=line_no)
    return val


def parse_graph(text, mode=None):
    """Parse an edge-list document into a DirectedGraph.

    `mode` ('directed' or 'undirected') overrides the '%mode' header; one of
    the two must declare it.  Undirected lines expand to two arcs; the second
    b defaults to the first when omitted.
    """
    header_mode = None
    declared_nodes = None
    rows = []  # (line_no, tokens)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("%"):
            parts = _tokens(line[1:])
            if not parts:
                raise GraphFormatError("empty directive", line=line_no)
            if parts[0] == "mode":
                if len(parts) != 2 or parts[1] not in ("directed", "undirected"):
                    raise GraphFormatError("expected '%mode directed|undirected'", line=line_no)
                header_mode = parts[1]
            elif parts[0] == "nodes":
                try:
                    declared_nodes = int(parts[1])
                except (IndexError, ValueError):
                    raise GraphFormatError("expected '%nodes N'", line=line_no) from None
            else:
                raise GraphFormatError(f"unknown directive %{parts[0]}", line=line_no)
            continue
        rows.append((line_no, _tokens(line)))

    mode = mode or header_mode
    if mode not in ("directed", "undirected"):
        raise GraphFormatError("graph mode not declared (use '%mode' header or a flag)")

    raw_names = []
    for line_no, toks in rows:
        if len(toks) < 3:
            raise GraphFormatError("expected 'u v b'", line=line_no)
        raw_names.append(toks[0])
        raw_names.append(toks[1])

    node_ids, labels, node_count = _resolve_names(raw_names, declared_nodes)

    arcs = {}
    for idx, (line_no, toks) in enumerate(rows):
        u = node_ids[2 * idx]
        v = node_ids[2 * idx + 1]
        if u == v:
            raise GraphFormatError(f"self-loop on node {toks[0]!r}", line=line_no)
        if mode == "directed":
            if len(toks) != 3:
                raise GraphFormatError("directed line takes exactly 'u v b'", line=line_no)
            pairs = [(u, v, _parse_prob(toks[2], line_no))]
        else:
            if len(toks) > 4:
                raise GraphFormatError("undirected line takes 'u v b_uv [b_vu]'", line=line_no)
            b_uv = _parse_prob(toks[2], line_no)
            b_vu = _parse_prob(toks[3], line_no) if len(toks) == 4 else b_uv
            pairs = [(u, v, b_uv), (v, u, b_vu)]
        for s, d, bb in pairs:
            if (s, d) in arcs:
                raise GraphFormatError(
                    f"duplicate arc {toks[0]} -> {toks[1]}"
                    if arcs[(s, d)] == bb else
                    f"conflicting duplicate arc {toks[0]} -> {toks[1]}",
                    line=line_no)
            arcs[(s, d)] = bb

    src = np.fromiter((k[0] for k in arcs), dtype=np.int64, count=len(arcs))
    dst = np.fromiter((k[1] for k in arcs), dtype=np.int64, count=len(arcs))
    bvals = np.fromiter(arcs.values(), dtype=np.float64, count=len(arcs))
    return DirectedGraph(node_count, src, dst, bvals, labels=labels)


def _resolve_names(raw_names, declared_nodes):
    """Map node tokens to dense ids; returns (ids, labels-or-None, node_count)."""
    as_int = []
    all_int = True
    for name in raw_names:
        try:
            as_int.append(int(name))
        except ValueError:
            all_int = False
            break
    if all_int and (not as_int or min(as_int) >= 0):
        max_id = max(as_int) if as_int else -1
        ids_seen = set(as_int)
        dense = len(ids_seen) == max_id + 1
        if dense or declared_nodes is not None:
            node_count = max(max_id + 1, declared_nodes or 0)
            if declared_nodes is not None and max_id >= declared_nodes:
                raise GraphFormatError(
                    f"node id {max_id} outside declared '%nodes {declared_nodes}'")
            return as_int, None, node_count
    # label map in order of first appearance
    index = {}
    ids = []
    for name in raw_names:
        if name not in index:
            index[name] = len(index)
        ids.append(index[name])
    labels = tuple(index)
    node_count = len(labels)
    if declared_nodes is not None and declared_nodes != node_count:
        raise GraphFormatError(
            f"'%nodes {declared_nodes}' does not match {node_count} labelled nodes")
    return ids, labels, node_count


def serialize_graph(graph):
    """Emit a directed-mode document that reparses to the same arcs and b."""
    lines = ["%mode directed", f"%nodes {graph.node_count}"]
    order = graph.out_arcs  # (src, dst)-major output
    for a in order:
        u = graph.label_of(graph.src[a])
        v = graph.label_of(graph.dst[a])
        lines.append(f"{u} {v} {float(graph.b[a])!r}")
    return "\n".join(lines) + "\n"


def _resolve_node_token(tok, graph, line_no):
    if graph.labels is not None:
        try:
            return graph.labels.index(tok)
        except ValueError:
            raise GraphFormatError(f"unknown node {tok!r}", line=line_no) from None
    try:
        node = int(tok)
    except ValueError:
        raise GraphFormatError(f"bad node id {tok!r}", line=line_no) from None
    if not 0 <= node < graph.node_count:
        raise GraphFormatError(f"unknown node {node}", line=line_no)
    return node


def parse_node_values(text, graph, default, what="value"):
    """Parse 'node value' lines into a dense vector, defaulting absent nodes."""
    values = np.full(graph.node_count, float(default))
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = _tokens(line)
        if len(toks) != 2:
            raise GraphFormatError(f"expected 'node {what}'", line=line_no)
        node = _resolve_node_token(toks[0], graph, line_no)
        if node in seen:
            raise GraphFormatError(f"duplicate entry for node {toks[0]}", line=line_no)
        seen.add(node)
        values[node] = _parse_prob(toks[1], line_no, what=what)
    return values


def parse_initial_condition(text, graph):
    """Parse 'node p0' lines; unlisted nodes default to probability 0."""
    return InitialCondition(parse_node_values(text, graph, 0.0, what="p0"))
