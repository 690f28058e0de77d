"""Network representation, CPT storage and evidence absorption.

A network is a DAG of discrete variables, each with a conditional
probability table over its parent configurations.  Tables are kept in two
interchangeable forms: a dense row array indexed lexicographically by the
parent values (first declared parent most significant), and a search tree
whose internal nodes test one parent each and whose leaves hold the
probability rows.  Both forms return the same float64 objects, so lookups
agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    arity: int


class TreeNode:
    """Internal search-tree node: tests one parent, one branch per value."""

    __slots__ = ("var", "children")

    def __init__(self, var, children):
        self.var = var
        self.children = tuple(children)


class TreeLeaf:
    """Search-tree leaf holding a probability row over the child variable."""

    __slots__ = ("row",)

    def __init__(self, row):
        self.row = row


def build_tree(cpt, parents, arities):
    """Build a search tree for a dense table.

    ``cpt`` is the (n_rows, arity) row array, ``parents`` the ordered parent
    ids and ``arities`` the arity of every variable in the network.  The
    first declared parent is tested at the root.  Leaf rows are views into
    the dense array, so tree and dense lookups are bit-identical.
    """
    cpt = np.asarray(cpt, dtype=np.float64)

    def rec(depth, base, span):
        if depth == len(parents):
            return TreeLeaf(cpt[base])
        p = parents[depth]
        width = span // arities[p]
        children = [rec(depth + 1, base + v * width, width)
                    for v in range(arities[p])]
        return TreeNode(p, children)

    return rec(0, 0, cpt.shape[0])


def tree_lookup(tree, values):
    """Walk a search tree down to the row selected by ``values``."""
    node = tree
    while isinstance(node, TreeNode):
        node = node.children[values[node.var]]
    return node.row


def prune_tree(tree, evidence):
    """Drop branches inconsistent with observed parent values.

    Nodes testing an observed variable collapse to the observed branch;
    only leaves reachable under the evidence survive.
    """
    if isinstance(tree, TreeLeaf):
        return tree
    if tree.var in evidence:
        return prune_tree(tree.children[evidence[tree.var]], evidence)
    return TreeNode(tree.var, [prune_tree(c, evidence) for c in tree.children])


def tree_leaves(tree):
    """Number of leaves in a search tree."""
    if isinstance(tree, TreeLeaf):
        return 1
    return sum(tree_leaves(c) for c in tree.children)


def tree_depth(tree):
    if isinstance(tree, TreeLeaf):
        return 0
    return 1 + max(tree_depth(c) for c in tree.children)


class Network:
    """Immutable belief network.

    ``parents[i]`` lists the parent ids of variable ``i`` in declaration
    order; ``cpts[i]`` is the dense row array with one row per parent
    configuration.  Construction validates the invariants (consecutive ids,
    acyclicity, row shapes, row sums within ``ROW_SUM_TOL``) and builds the
    search trees.  Instances are safe to share across threads.
    """

    def __init__(self, name, variables, parents, cpts, trees=None,
                 validate=True):
        self.name = name
        self.variables = tuple(variables)
        self.parents = tuple(tuple(p) for p in parents)
        self.cpts = []
        for c in cpts:
            arr = np.ascontiguousarray(c, dtype=np.float64)
            arr.setflags(write=False)
            self.cpts.append(arr)
        self.n = len(self.variables)
        self.arities = np.array([v.arity for v in self.variables],
                                dtype=np.int32)
        self.children = tuple(
            tuple(c for c in range(self.n) if i in self.parents[c])
            for i in range(self.n))
        self.by_name = {v.name: v.id for v in self.variables}
        if validate:
            self._validate()
        if trees is None:
            trees = [build_tree(self.cpts[i], self.parents[i], self.arities)
                     for i in range(self.n)]
        self.trees = tuple(trees)

    def _validate(self):
        if len(self.by_name) != self.n:
            raise ValidationError("duplicate variable name")
        for i, v in enumerate(self.variables):
            if v.id != i:
                raise ValidationError(
                    f"variable ids must be consecutive, got {v.id} at {i}")
            if v.arity < 2:
                raise ValidationError(f"variable {v.name}: arity must be >= 2")
        for i in range(self.n):
            for p in self.parents[i]:
                if not 0 <= p < self.n:
                    raise ValidationError(
                        f"variable {self.variables[i].name}: parent id {p} "
                        "out of range")
            n_rows = 1
            for p in self.parents[i]:
                n_rows *= self.variables[p].arity
            cpt = self.cpts[i]
            if cpt.shape != (n_rows, self.variables[i].arity):
                raise ValidationError(
                    f"variable {self.variables[i].name}: cpt shape "
                    f"{cpt.shape} != ({n_rows}, {self.variables[i].arity})")
            if np.any(cpt < 0.0) or np.any(cpt > 1.0):
                raise ValidationError(
                    f"variable {self.variables[i].name}: cpt entry outside "
                    "[0, 1]")
            bad = np.abs(cpt.sum(axis=1) - 1.0) > ROW_SUM_TOL
            if np.any(bad):
                r = int(np.argmax(bad))
                raise ValidationError(
                    f"variable {self.variables[i].name}: cpt row {r} sums to "
                    f"{cpt[r].sum():.6g}, expected 1")
        self._check_acyclic()

    def _check_acyclic(self):
        indeg = [len(p) for p in self.parents]
        queue = [i for i in range(self.n) if indeg[i] == 0]
        seen = 0
        while queue:
            i = queue.pop()
            seen += 1
            for c in self.children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if seen != self.n:
            raise ValidationError("cycle detected in parent relation")

    def row_index(self, var, values):
        """Dense row index for ``var`` given a (partial) instantiation."""
        idx = 0
        for p in self.parents[var]:
            idx = idx * self.variables[p].arity + int(values[p])
        return idx

    def dense_row(self, var, values):
        return self.cpts[var][self.row_index(var, values)]

    def tree_row(self, var, values):
        return tree_lookup(self.trees[var], values)

    def row(self, var, values, rep="tree"):
        if rep == "tree":
            return tree_lookup(self.trees[var], values)
        return self.cpts[var][self.row_index(var, values)]

    def max_arity(self):
        return int(self.arities.max()) if self.n else 0

    def __repr__(self):
        return f"Network({self.name!r}, n={self.n})"


def cpt_lookup(net, var, values):
    """Distribution over ``var`` given its parents' values in ``values``."""
    return net.dense_row(var, values)


def absorb_evidence(net, evidence):
    """Remove outgoing arcs of observed variables and prune child tables.

    Children of an observed variable drop it from their parent lists; their
    dense tables are sliced to the observed configuration and their search
    trees pruned to the consistent branches.  Lookups on the result equal
    lookups on the original network for every instantiation consistent with
    the evidence.  Observed variables keep their own tables, so evidence
    weights stay computable.  An empty evidence map returns ``net`` itself.
    """
    if not evidence:
        return net
    for x, v in evidence.items():
        if not 0 <= v < net.variables[x].arity:
            raise ValidationError(
                f"evidence value {v} out of range for "
                f"{net.variables[x].name}")
    parents = []
    cpts = []
    trees = []
    for i in range(net.n):
        old = net.parents[i]
        kept = tuple(p for p in old if p not in evidence)
        if len(kept) == len(old):
            parents.append(old)
            cpts.append(net.cpts[i])
            trees.append(net.trees[i])
            continue
        shape = tuple(net.variables[p].arity for p in old) + (
            net.variables[i].arity,)
        cube = net.cpts[i].reshape(shape)
        sel = tuple(evidence[p] if p in evidence else slice(None)
                    for p in old)
        sliced = np.ascontiguousarray(cube[sel]).reshape(
            -1, net.variables[i].arity)
        parents.append(kept)
        cpts.append(sliced)
        trees.append(prune_tree(net.trees[i], evidence))
    return Network(net.name, net.variables, parents, cpts, trees=trees)


def ordering_weight(cpt):
    """Mean fourth power of the table entries, in [0, 1].

    Large when the table is near-deterministic, small when it is diffuse;
    used to push stable variables to the front of an ordering.
    """
    rows = np.asarray(cpt, dtype=np.float64)
    return float(np.mean(rows ** 4))


def topological_order(net, use_heuristic=False):
    """Topological ordering of the variable ids.

    Among the variables whose parents are all placed, the plain order picks
    the lowest id; the heuristic order picks the largest ``ordering_weight``
    (ties by lowest id).
    """
    weights = None
    if use_heuristic:
        weights = [ordering_weight(net.cpts[i]) for i in range(net.n)]
    indeg = [len(p) for p in net.parents]
    ready = [i for i in range(net.n) if indeg[i] == 0]
    order = np.empty(net.n, dtype=np.int32)
    for k in range(net.n):
        if use_heuristic:
            best = max(ready, key=lambda i: (weights[i], -i))
        else:
            best = min(ready)
        ready.remove(best)
        order[k] = best
        for c in net.children[best]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order


def is_topological(net, order):
    """Check that every parent precedes each of its children in ``order``."""
    pos = {int(v): k for k, v in enumerate(order)}
    if len(pos) != net.n:
        return False
    return all(pos[p] < pos[i]
               for i in range(net.n) for p in net.parents[i])


# ---------------------------------------------------------------------------
# Text format
#
#   net <name>
#   var <name> <arity>                  one per variable, in id order
#   parents <name> <p1> <p2> ...        for variables with parents
#   cpt <name>                          followed by one row per parent
#   <p> <p> ...                         configuration, lexicographic order,
#                                       first declared parent most significant
#
# '#' starts a comment; blank lines are ignored.
# ---------------------------------------------------------------------------

def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def load_network(text):
    """Parse the text network format into a validated ``Network``."""
    toks = list(_tokens(text))
    if not toks or toks[0][1][0] != "net":
        raise ParseError("expected 'net <name>' header",
                         toks[0][0] if toks else 1)
    if len(toks[0][1]) != 2:
        raise ParseError("expected 'net <name>'", toks[0][0])
    name = toks[0][1][1]
    variables = []
    by_name = {}
    parents = {}
    cpt_rows = {}
    i = 1
    while i < len(toks):
        lineno, t = toks[i]
        if t[0] == "var":
            if len(t) != 3:
                raise ParseError("expected 'var <name> <arity>'", lineno)
            if t[1] in by_name:
                raise ParseError(f"duplicate variable '{t[1]}'", lineno)
            try:
                arity = int(t[2])
            except ValueError:
                raise ParseError(f"bad arity '{t[2]}'", lineno) from None
            if arity < 2:
                raise ParseError(f"arity must be >= 2, got {arity}", lineno)
            vid = len(variables)
            variables.append(Variable(vid, t[1], arity))
            by_name[t[1]] = vid
            i += 1
        elif t[0] == "parents":
            if len(t) < 3:
                raise ParseError("expected 'parents <name> <p1> ...'", lineno)
            if t[1] not in by_name:
                raise ParseError(f"undeclared variable '{t[1]}'", lineno)
            plist = []
            for p in t[2:]:
                if p not in by_name:
                    raise ParseError(f"undeclared parent '{p}'", lineno)
                plist.append(by_name[p])
            parents[by_name[t[1]]] = plist
            i += 1
        elif t[0] == "cpt":
            if len(t) != 2:
                raise ParseError("expected 'cpt <name>'", lineno)
            if t[1] not in by_name:
                raise ParseError(f"undeclared variable '{t[1]}'", lineno)
            vid = by_name[t[1]]
            n_rows = 1
            for p in parents.get(vid, ()):
                n_rows *= variables[p].arity
            rows = []
            i += 1
            while len(rows) < n_rows:
                if i >= len(toks):
                    raise ParseError(
                        f"cpt {t[1]}: expected {n_rows} rows, got {len(rows)}",
                        lineno)
                rlineno, rtok = toks[i]
                try:
                    row = [float(x) for x in rtok]
                except ValueError:
                    raise ParseError("bad probability in cpt row", rlineno) \
                        from None
                if len(row) != variables[vid].arity:
                    raise ParseError(
                        f"cpt {t[1]}: row has {len(row)} entries, expected "
                        f"{variables[vid].arity}", rlineno)
                if abs(sum(row) - 1.0) > ROW_SUM_TOL:
                    raise ParseError(
                        f"cpt {t[1]}: row sums to {sum(row):.6g}, expected 1",
                        rlineno)
                rows.append(row)
                i += 1
            cpt_rows[vid] = rows
        else:
            raise ParseError(f"unknown directive '{t[0]}'", lineno)
    if not variables:
        raise ParseError("no variables declared", 1)
    missing = [v.name for v in variables if v.id not in cpt_rows]
    if missing:
        raise ParseError(f"missing cpt for {', '.join(missing)}", toks[-1][0])
    try:
        return Network(name, variables,
                       [parents.get(v.id, ()) for v in variables],
                       [cpt_rows[v.id] for v in variables])
    except ValidationError as exc:
        raise ParseError(str(exc), toks[0][0]) from exc


def save_network(net):
    """Serialize a network; round-trips through ``load_network`` exactly."""
    out = [f"net {net.name}"]
    for v in net.variables:
        out.append(f"var {v.name} {v.arity}")
    for i in range(net.n):
        if net.parents[i]:
            names = " ".join(net.variables[p].name for p in net.parents[i])
            out.append(f"parents {net.variables[i].name} {names}")
    for i in range(net.n):
        out.append(f"cpt {net.variables[i].name}")
        for row in net.cpts[i]:
            out.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"


def load_evidence(text, net):
    """Parse '<name> <value-index>' lines into an id -> value map."""
    ev = {}
    for lineno, t in _tokens(text):
        if len(t) != 2:
            raise ParseError("expected '<name> <value-index>'", lineno)
        if t[0] not in net.by_name:
            raise ParseError(f"unknown variable '{t[0]}'", lineno)
        vid = net.by_name[t[0]]
        try:
            val = int(t[1])
        except ValueError:
            raise ParseError(f"bad value index '{t[1]}'", lineno) from None
        if not 0 <= val < net.variables[vid].arity:
            raise ParseError(
                f"value {val} out of range for '{t[0]}'", lineno)
        ev[vid] = val
    return ev


def save_evidence(evidence, net):
    return "".join(f"{net.variables[x].name} {v}\n"
                   for x, v in sorted(evidence.items()))
