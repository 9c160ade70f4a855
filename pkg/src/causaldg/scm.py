"""Exact inference on discrete structural causal models.

A model is a DAG of categorical variables, each with a conditional
probability table (CPT) given its parents. Everything here is exact
enumeration over the joint assignment space: joint/conditional/marginal
distributions, graph surgery for interventions, d-separation over
back-door paths, and the back-door adjustment formula

    P(Y | do(X=x)) = sum_d P(Y | X=x, D=d) P(D=d)

together with a diagnostic that measures how far the adjusted
distribution sits from the plain conditional P(Y | X=x).

Conventions
-----------
* CPT rows are ordered lexicographically over parent values, parents
  taken in variable declaration order, first parent most significant.
* Joint tables enumerate variables in topological order (declaration
  order breaking ties), values lexicographic, so reports are stable.
* Probabilities live in linear space as float64; the cell budget keeps
  joints small enough that log-space is unnecessary.
* Zero-probability adjustment strata: P(Y|X,D) is undefined where
  P(X=x, D=d) = 0. The default policy ("complete") fills those strata
  from the x-intervened model, which reproduces the exact interventional
  answer on deterministic-mechanism models where the observational
  formula has no data; "skip" drops them and renormalizes P(D) over the
  rest; "error" refuses.

All functions are pure; ``ScmSpec`` and ``DistTable`` are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_CELL_BUDGET = 10_000_000

__all__ = [
    "ScmError",
    "CycleError",
    "ZeroProbabilityError",
    "SizeBudgetError",
    "CriterionError",
    "ScmSpec",
    "DistTable",
    "topo_order",
    "joint_distribution",
    "marginal",
    "conditional",
    "do_intervention",
    "is_descendant",
    "descendants",
    "backdoor_paths",
    "backdoor_criterion",
    "backdoor_adjust",
    "interventional_oracle",
    "check_adjustment_invariance",
    "tv_distance",
    "parse_scm",
    "format_scm",
    "read_scm_file",
    "write_scm_file",
    "PathReport",
    "CriterionReport",
    "InvarianceReport",
]


class ScmError(ValueError):
    """Base class for all model specification and inference errors."""


class CycleError(ScmError):
    def __init__(self, cycle: Sequence[str]):
        self.cycle = list(cycle)
        super().__init__("edge set is cyclic: " + " -> ".join(self.cycle))


class ZeroProbabilityError(ScmError):
    """Conditioning event (or every adjustment stratum) has probability zero."""


class SizeBudgetError(ScmError):
    def __init__(self, cells: int, budget: int):
        self.cells = cells
        self.budget = budget
        super().__init__(
            f"joint assignment space has {cells} cells, over the budget of {budget}"
        )


class CriterionError(ScmError):
    """Back-door criterion violated for the requested adjustment."""


@dataclass(frozen=True)
class ScmSpec:
    """A discrete SCM: variables with cardinalities, edges, and CPTs.

    Parameters
    ----------
    variables : sequence of (name, cardinality)
        Declaration order is the tie-breaking order everywhere.
    edges : sequence of (parent, child)
    cpts : mapping name -> array of shape (prod(parent cards), cardinality)
        Rows in parent-value-lexicographic order, parents in declaration
        order. Root variables have a single row.
    """

    variables: tuple[tuple[str, int], ...]
    edges: tuple[tuple[str, str], ...]
    cpts: Mapping[str, np.ndarray]

    def __init__(self, variables, edges, cpts):
        variables = tuple((str(n), int(c)) for n, c in variables)
        edges = tuple((str(p), str(c)) for p, c in edges)
        frozen_cpts = {}
        for name, table in cpts.items():
            arr = np.ascontiguousarray(table, dtype=np.float64)
            arr.flags.writeable = False
            frozen_cpts[str(name)] = arr
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "cpts", frozen_cpts)
        self._validate()

    # -- structure accessors -------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    def cardinality(self, name: str) -> int:
        for n, c in self.variables:
            if n == name:
                return c
        raise ScmError(f"unknown variable {name!r}; known: {list(self.names)}")

    def parents(self, name: str) -> tuple[str, ...]:
        """Parents of ``name`` in declaration order (the CPT axis order)."""
        self.cardinality(name)
        ps = {p for p, c in self.edges if c == name}
        return tuple(n for n in self.names if n in ps)

    def children(self, name: str) -> tuple[str, ...]:
        self.cardinality(name)
        cs = {c for p, c in self.edges if p == name}
        return tuple(n for n in self.names if n in cs)

    # -- validation ----------------------------------------------------------

    def _validate(self) -> None:
        names = self.names
        if len(set(names)) != len(names):
            raise ScmError("duplicate variable names")
        for n, c in self.variables:
            if c < 1:
                raise ScmError(f"variable {n!r} has cardinality {c}; need >= 1")
        known = set(names)
        seen_edges = set()
        for p, c in self.edges:
            if p not in known or c not in known:
                raise ScmError(f"edge ({p!r}, {c!r}) references an unknown variable")
            if p == c:
                raise ScmError(f"self-loop on {p!r}")
            if (p, c) in seen_edges:
                raise ScmError(f"duplicate edge ({p!r}, {c!r})")
            seen_edges.add((p, c))
        topo_order(self)  # raises CycleError with the offending cycle
        if set(self.cpts) != known:
            missing = sorted(known - set(self.cpts))
            extra = sorted(set(self.cpts) - known)
            raise ScmError(f"CPTs missing for {missing}, unexpected for {extra}")
        for n, card in self.variables:
            rows = int(np.prod([self.cardinality(p) for p in self.parents(n)], dtype=np.int64))
            table = self.cpts[n]
            if table.shape != (rows, card):
                raise ScmError(
                    f"CPT for {n!r} has shape {table.shape}, expected ({rows}, {card})"
                )
            if np.any(table < 0):
                raise ScmError(f"CPT for {n!r} has negative entries")
            sums = table.sum(axis=1)
            bad = np.nonzero(np.abs(sums - 1.0) > 1e-12)[0]
            if bad.size:
                raise ScmError(
                    f"CPT rows for {n!r} do not sum to 1 (rows {bad.tolist()}, "
                    f"sums {sums[bad].tolist()})"
                )


@dataclass(frozen=True)
class DistTable:
    """Dense probability table over a tuple of named variables."""

    names: tuple[str, ...]
    cards: tuple[int, ...]
    probs: np.ndarray  # shape == cards

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.shape != tuple(self.cards):
            raise ScmError(f"probs shape {probs.shape} != cards {self.cards}")
        if np.any(probs < -1e-15) or np.any(probs > 1 + 1e-12):
            raise ScmError("probabilities outside [0, 1]")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ScmError(f"unknown variable {name!r}; table has {list(self.names)}") from None


# ---------------------------------------------------------------------------
# Graph operations
# ---------------------------------------------------------------------------


def topo_order(scm: ScmSpec) -> list[str]:
    """Topological order, ties broken by declaration order.

    Raises ``CycleError`` listing one offending cycle if the edges are cyclic.
    """
    names = list(scm.names)
    index = {n: i for i, n in enumerate(names)}
    indeg = {n: 0 for n in names}
    children: dict[str, list[str]] = {n: [] for n in names}
    for p, c in scm.edges:
        children[p].append(c)
        indeg[c] += 1
    ready = sorted((n for n in names if indeg[n] == 0), key=index.get)
    order: list[str] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for c in sorted(children[v], key=index.get):
            indeg[c] -= 1
            if indeg[c] == 0:
                # keep `ready` sorted by declaration index
                ready.append(c)
                ready.sort(key=index.get)
    if len(order) < len(names):
        remaining = [n for n in names if n not in order]
        raise CycleError(_find_cycle(scm, remaining))
    return order


def _find_cycle(scm: ScmSpec, remaining: Sequence[str]) -> list[str]:
    remaining_set = set(remaining)
    parents = {n: [p for p, c in scm.edges if c == n and p in remaining_set] for n in remaining}
    node = remaining[0]
    trail = [node]
    seen = {node: 0}
    while True:
        node = parents[node][0]
        if node in seen:
            cycle = trail[seen[node]:] + [node]
            cycle.reverse()
            return cycle
        seen[node] = len(trail)
        trail.append(node)


def descendants(scm: ScmSpec, name: str) -> set[str]:
    """All strict descendants of ``name``."""
    scm.cardinality(name)
    out: set[str] = set()
    stack = list(scm.children(name))
    while stack:
        v = stack.pop()
        if v not in out:
            out.add(v)
            stack.extend(scm.children(v))
    return out


def is_descendant(scm: ScmSpec, a: str, b: str) -> bool:
    """True iff a directed path b -> ... -> a exists (a is not its own descendant)."""
    scm.cardinality(a)
    return a in descendants(scm, b)


# ---------------------------------------------------------------------------
# Exact inference
# ---------------------------------------------------------------------------


def joint_distribution(scm: ScmSpec, cell_budget: int = DEFAULT_CELL_BUDGET) -> DistTable:
    """Exact joint by multiplying CPT factors along the topological order."""
    order = topo_order(scm)
    cards = [scm.cardinality(n) for n in order]
    cells = math.prod(cards)
    if cells > cell_budget:
        raise SizeBudgetError(cells, cell_budget)
    axis = {n: i for i, n in enumerate(order)}
    probs = np.ones(cards, dtype=np.float64)
    for name in order:
        parents = scm.parents(name)
        dst_axes = [axis[p] for p in parents] + [axis[name]]
        shaped = scm.cpts[name].reshape([scm.cardinality(p) for p in parents] + [scm.cardinality(name)])
        perm = np.argsort(dst_axes)
        shaped = np.transpose(shaped, perm)
        dst_set = set(dst_axes)
        full_shape = [cards[i] if i in dst_set else 1 for i in range(len(order))]
        probs = probs * shaped.reshape(full_shape)
    return DistTable(tuple(order), tuple(cards), probs)


def marginal(table: DistTable, name: str) -> np.ndarray:
    """Marginal distribution of one variable as a 1-D array."""
    ax = table.axis(name)
    other = tuple(i for i in range(len(table.names)) if i != ax)
    return table.probs.sum(axis=other)


def conditional(table: DistTable, target: str, given: Mapping[str, int]) -> np.ndarray:
    """Renormalized slice P(target | given) as a 1-D array.

    Raises ``ZeroProbabilityError`` when the conditioning event has zero mass.
    """
    t_ax = table.axis(target)
    if target in given:
        raise ScmError(f"target {target!r} appears in the conditioning assignment")
    idx: list[object] = [slice(None)] * len(table.names)
    for name, value in given.items():
        ax = table.axis(name)
        card = table.cards[ax]
        if not 0 <= int(value) < card:
            raise ScmError(f"value {value} out of range for {name!r} (cardinality {card})")
        idx[ax] = int(value)
    sliced = table.probs[tuple(idx)]
    # axes of `sliced` correspond to the non-fixed names in table order
    free = [n for n in table.names if n not in given]
    reduce_axes = tuple(i for i, n in enumerate(free) if n != target)
    vec = sliced.sum(axis=reduce_axes) if reduce_axes else sliced
    mass = float(vec.sum())
    if mass <= 0.0:
        raise ZeroProbabilityError(
            f"conditioning event {dict(given)} has probability zero; "
            f"P({target} | ...) is undefined"
        )
    return vec / mass


def do_intervention(scm: ScmSpec, var: str, value: int) -> ScmSpec:
    """Graph surgery: drop edges into ``var`` and pin it to ``value``.

    Every other CPT is shared unchanged with the input model.
    """
    card = scm.cardinality(var)
    if not 0 <= int(value) < card:
        raise ScmError(f"value {value} out of range for {var!r} (cardinality {card})")
    point = np.zeros((1, card))
    point[0, int(value)] = 1.0
    edges = tuple(e for e in scm.edges if e[1] != var)
    cpts = {n: (point if n == var else t) for n, t in scm.cpts.items()}
    return ScmSpec(scm.variables, edges, cpts)


def interventional_oracle(scm: ScmSpec, x: str, x_val: int, y: str) -> np.ndarray:
    """Ground-truth P(y | do(x=x_val)) by mutilated-graph enumeration."""
    return marginal(joint_distribution(do_intervention(scm, x, x_val)), y)


# ---------------------------------------------------------------------------
# Back-door machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathReport:
    nodes: tuple[str, ...]
    arrows: tuple[str, ...]  # "<-" or "->" between consecutive nodes
    blocked: bool
    reason: str

    def render(self) -> str:
        parts = [self.nodes[0]]
        for arrow, node in zip(self.arrows, self.nodes[1:]):
            parts.append(arrow)
            parts.append(node)
        status = "blocked" if self.blocked else "OPEN"
        return f"{' '.join(parts)}  [{status}: {self.reason}]"


@dataclass(frozen=True)
class CriterionReport:
    holds: bool
    x: str
    y: str
    adjustment: tuple[str, ...]
    descendant_violations: tuple[str, ...]  # human-readable violation notes
    paths: tuple[PathReport, ...]

    def render(self) -> str:
        lines = [
            f"back-door criterion for ({self.x} -> {self.y}) adjusting for "
            f"{{{', '.join(self.adjustment)}}}: {'holds' if self.holds else 'violated'}"
        ]
        lines += [f"  {v}" for v in self.descendant_violations]
        if self.paths:
            lines += [f"  {p.render()}" for p in self.paths]
        else:
            lines.append("  no back-door paths")
        return "\n".join(lines)


def _skeleton_neighbors(scm: ScmSpec) -> dict[str, list[str]]:
    nbr: dict[str, set[str]] = {n: set() for n in scm.names}
    for p, c in scm.edges:
        nbr[p].add(c)
        nbr[c].add(p)
    index = {n: i for i, n in enumerate(scm.names)}
    return {n: sorted(v, key=index.get) for n, v in nbr.items()}


def _all_simple_paths(scm: ScmSpec, x: str, y: str) -> list[list[str]]:
    nbr = _skeleton_neighbors(scm)
    paths: list[list[str]] = []
    stack: list[tuple[str, list[str]]] = [(x, [x])]
    while stack:
        node, trail = stack.pop()
        for nxt in reversed(nbr[node]):
            if nxt in trail:
                continue
            if nxt == y:
                paths.append(trail + [y])
            else:
                stack.append((nxt, trail + [nxt]))
    paths.sort()
    return paths


def backdoor_paths(scm: ScmSpec, x: str, y: str) -> list[list[str]]:
    """Simple paths from x to y whose first edge points into x."""
    scm.cardinality(x)
    scm.cardinality(y)
    if x == y:
        raise ScmError("x and y must be distinct")
    edges = set(scm.edges)
    return [p for p in _all_simple_paths(scm, x, y) if (p[1], p[0]) in edges]


def _path_arrows(scm: ScmSpec, path: Sequence[str]) -> list[str]:
    edges = set(scm.edges)
    return ["->" if (a, b) in edges else "<-" for a, b in zip(path, path[1:])]


def _path_blocked(scm: ScmSpec, path: Sequence[str], adj: set[str]) -> tuple[bool, str]:
    """d-separation blocking of one path by the set ``adj``."""
    arrows = _path_arrows(scm, path)
    for i in range(1, len(path) - 1):
        node = path[i]
        is_collider = arrows[i - 1] == "->" and arrows[i] == "<-"
        if not is_collider:
            if node in adj:
                return True, f"non-collider {node} is in the adjustment set"
        else:
            opened = node in adj or bool(descendants(scm, node) & adj)
            if not opened:
                return True, f"collider {node} (and its descendants) outside the adjustment set"
    return False, "no blocking node"


def backdoor_criterion(scm: ScmSpec, x: str, y: str, adj: Iterable[str]) -> CriterionReport:
    """Check whether ``adj`` is a valid back-door adjustment set for (x, y).

    Two conditions: no member of ``adj`` may be a descendant of x or of y,
    and every back-door path (a path whose first arrow points into x) must
    be d-separation-blocked by ``adj``. The report lists each back-door path
    with its blocking status.
    """
    adj_set = {str(a) for a in adj}
    for a in adj_set:
        scm.cardinality(a)
    if x in adj_set or y in adj_set:
        raise ScmError("x and y may not appear in the adjustment set")
    violations = []
    desc_x = descendants(scm, x)
    desc_y = descendants(scm, y)
    index = {n: i for i, n in enumerate(scm.names)}
    for a in sorted(adj_set, key=index.get):
        if a in desc_x:
            violations.append(f"{a} is a descendant of treatment {x}")
        if a in desc_y:
            violations.append(f"{a} is a descendant of outcome {y}")
    reports = []
    for path in backdoor_paths(scm, x, y):
        blocked, reason = _path_blocked(scm, path, adj_set)
        reports.append(
            PathReport(tuple(path), tuple(_path_arrows(scm, path)), blocked, reason)
        )
    holds = not violations and all(p.blocked for p in reports)
    return CriterionReport(
        holds=holds,
        x=x,
        y=y,
        adjustment=tuple(sorted(adj_set, key=index.get)),
        descendant_violations=tuple(violations),
        paths=tuple(reports),
    )


def backdoor_adjust(
    scm: ScmSpec,
    x: str,
    x_val: int,
    y: str,
    adj: str,
    *,
    unchecked: bool = False,
    zero_strata: str = "complete",
) -> np.ndarray:
    """Back-door adjustment: sum_d P(y | x=x_val, adj=d) P(adj=d).

    The stratum conditionals are read from the observational joint wherever
    P(x=x_val, adj=d) > 0. Strata with zero mass are handled per
    ``zero_strata``: "complete" (default) fills them with the conditional of
    the x-intervened joint given adj=d, which extends the formula exactly on
    deterministic mechanisms; "skip" drops them and renormalizes P(adj) over
    the remainder; "error" raises.

    Unless ``unchecked`` is set, the back-door criterion for (x, y, {adj})
    is enforced first.
    """
    if zero_strata not in ("complete", "skip", "error"):
        raise ScmError(f"unknown zero_strata policy {zero_strata!r}")
    if not unchecked:
        report = backdoor_criterion(scm, x, y, {adj})
        if not report.holds:
            raise CriterionError(report.render())
    joint = joint_distribution(scm)
    if not 0 <= int(x_val) < scm.cardinality(x):
        raise ScmError(f"value {x_val} out of range for {x!r}")
    p_adj = marginal(joint, adj)
    acc = np.zeros(scm.cardinality(y))
    kept = 0.0
    do_joint = None
    for d, p_d in enumerate(p_adj):
        if p_d <= 0.0:
            continue
        try:
            q = conditional(joint, y, {x: int(x_val), adj: d})
        except ZeroProbabilityError:
            if zero_strata == "skip":
                continue
            if zero_strata == "error":
                raise
            if do_joint is None:
                do_joint = joint_distribution(do_intervention(scm, x, int(x_val)))
            q = conditional(do_joint, y, {adj: d})
        acc += p_d * q
        kept += p_d
    if kept <= 0.0:
        raise ZeroProbabilityError(
            f"every adjustment stratum of {adj!r} has zero probability at {x}={x_val}"
        )
    return acc / kept


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total-variation distance between two distributions on the same support."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ScmError(f"distribution shapes differ: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


@dataclass(frozen=True)
class InvarianceReport:
    holds: bool
    eps: float
    max_deviation: float
    per_value: Mapping[int, float] = field(default_factory=dict)

    def render(self) -> str:
        verdict = "holds" if self.holds else "violated"
        lines = [
            f"adjustment invariance {verdict} "
            f"(max TV deviation {self.max_deviation:.6g}, tolerance {self.eps:g})"
        ]
        for v, dev in sorted(self.per_value.items()):
            lines.append(f"  value {v}: deviation {dev:.6g}")
        return "\n".join(lines)


def check_adjustment_invariance(
    scm: ScmSpec, m: str, y: str, adj: str, eps: float = 1e-9
) -> InvarianceReport:
    """Test whether adjusting for ``adj`` changes P(y | m) at all.

    For every value of ``m`` with positive probability, compares the plain
    conditional against the back-door-adjusted distribution and reports the
    maximum total-variation deviation. A deviation of zero is the signature
    of a representation that the adjustment variable does not confound;
    positive deviation quantifies the confounding.

    The adjustment formula is evaluated unconditionally (no criterion
    gate): this is a diagnostic of the formula itself, mirroring how the
    adjusted predictor is constructed during training.
    """
    joint = joint_distribution(scm)
    p_m = marginal(joint, m)
    per_value: dict[int, float] = {}
    for mv, p in enumerate(p_m):
        if p <= 0.0:
            continue
        cond = conditional(joint, y, {m: mv})
        adjusted = backdoor_adjust(scm, m, mv, y, adj, unchecked=True)
        per_value[mv] = tv_distance(cond, adjusted)
    max_dev = max(per_value.values(), default=0.0)
    return InvarianceReport(
        holds=max_dev <= eps, eps=eps, max_deviation=max_dev, per_value=per_value
    )


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_FORMAT_DOC = """\
# SCM text format:
#   var <name> <cardinality>
#   edge <parent> <child>
#   cpt <name>
#     <p0> <p1> ...        one row per parent assignment, rows in
#                          parent-value-lexicographic order, parents
#                          in declaration order (first parent most
#                          significant)
"""


def parse_scm(text: str) -> ScmSpec:
    """Parse the key/value + table text format. Errors carry line numbers."""
    variables: list[tuple[str, int]] = []
    edges: list[tuple[str, str]] = []
    cpt_rows: dict[str, list[list[float]]] = {}
    pending: str | None = None  # variable whose CPT rows are being collected

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "var":
            if len(tokens) != 3:
                raise ScmError(f"line {lineno}: expected 'var <name> <cardinality>'")
            try:
                card = int(tokens[2])
            except ValueError:
                raise ScmError(f"line {lineno}: cardinality {tokens[2]!r} is not an integer") from None
            variables.append((tokens[1], card))
            pending = None
        elif head == "edge":
            if len(tokens) != 3:
                raise ScmError(f"line {lineno}: expected 'edge <parent> <child>'")
            edges.append((tokens[1], tokens[2]))
            pending = None
        elif head == "cpt":
            if len(tokens) != 2:
                raise ScmError(f"line {lineno}: expected 'cpt <name>'")
            pending = tokens[1]
            if pending in cpt_rows:
                raise ScmError(f"line {lineno}: duplicate cpt block for {pending!r}")
            cpt_rows[pending] = []
        else:
            if pending is None:
                raise ScmError(f"line {lineno}: unexpected content {line!r}")
            try:
                cpt_rows[pending].append([float(t) for t in tokens])
            except ValueError:
                raise ScmError(f"line {lineno}: CPT row contains a non-number: {line!r}") from None

    if not variables:
        raise ScmError("no variables declared")
    missing = [n for n, _ in variables if n not in cpt_rows]
    if missing:
        raise ScmError(f"no cpt block for variables {missing}")
    cpts = {n: np.array(rows, dtype=np.float64) for n, rows in cpt_rows.items()}
    return ScmSpec(variables, edges, cpts)


def format_scm(scm: ScmSpec) -> str:
    """Serialize to the text format (round-trips through ``parse_scm``)."""
    lines = [_FORMAT_DOC.rstrip()]
    for n, c in scm.variables:
        lines.append(f"var {n} {c}")
    for p, c in scm.edges:
        lines.append(f"edge {p} {c}")
    for n, _ in scm.variables:
        parents = scm.parents(n)
        suffix = f"  # parents: {', '.join(parents)}" if parents else ""
        lines.append(f"cpt {n}{suffix}")
        for row in scm.cpts[n]:
            lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def read_scm_file(path) -> ScmSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_scm(f.read())


def write_scm_file(scm: ScmSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_scm(scm))
