"""Flattened array view of a network for the compiled kernel.

Everything the sampling loops touch is packed into contiguous numpy
arrays: dense tables with per-parent strides, the search trees as index
arrays, child lists and the evidence/ordering vectors.  Leaf rows are
copied verbatim from the dense tables, so the two representations stay
bit-identical.
"""

from __future__ import annotations

import numpy as np

from .model import TreeLeaf


class FlatNet:
    __slots__ = (
        "n", "max_arity", "arity", "ev_val", "order",
        "par_off", "par_ids", "par_stride", "cpt_off", "cpt_vals",
        "child_off", "child_ids",
        "troot", "tvar", "tchild", "tprobs", "use_tree",
    )


def _flatten_tree_bfs(root, arities):
    """Breadth-first tree layout: a node's children occupy a contiguous
    index range starting at its child pointer."""
    nodes = [root]
    var = []
    child = []
    probs = []
    i = 0
    while i < len(nodes):
        node = nodes[i]
        if isinstance(node, TreeLeaf):
            var.append(-1)
            child.append(len(probs))
            probs.extend(float(x) for x in node.row)
        else:
            var.append(node.var)
            child.append(len(nodes))
            nodes.extend(node.children)
        i += 1
    return var, child, probs


def flatten(net, evidence, order, rep="tree"):
    flat = FlatNet()
    n = net.n
    flat.n = n
    flat.max_arity = net.max_arity()
    flat.arity = np.ascontiguousarray(net.arities, dtype=np.int32)
    ev = np.full(n, -1, dtype=np.int32)
    for x, v in (evidence or {}).items():
        ev[x] = v
    flat.ev_val = ev
    flat.order = np.ascontiguousarray(order, dtype=np.int32)
    flat.use_tree = 1 if rep == "tree" else 0

    par_off = np.zeros(n + 1, dtype=np.int64)
    par_ids = []
    par_stride = []
    cpt_off = np.zeros(n + 1, dtype=np.int64)
    cpt_vals = []
    for i in range(n):
        ps = net.parents[i]
        par_off[i + 1] = par_off[i] + len(ps)
        stride = 1
        strides = [0] * len(ps)
        for k in range(len(ps) - 1, -1, -1):
            strides[k] = stride
            stride *= net.variables[ps[k]].arity
        par_ids.extend(ps)
        par_stride.extend(strides)
        cpt_off[i + 1] = cpt_off[i] + net.cpts[i].size
        cpt_vals.append(net.cpts[i].ravel())
    flat.par_off = par_off
    flat.par_ids = np.array(par_ids, dtype=np.int32)
    flat.par_stride = np.array(par_stride, dtype=np.int64)
    flat.cpt_off = cpt_off
    flat.cpt_vals = (np.ascontiguousarray(np.concatenate(cpt_vals))
                     if cpt_vals else np.zeros(0))

    child_off = np.zeros(n + 1, dtype=np.int64)
    child_ids = []
    for i in range(n):
        child_off[i + 1] = child_off[i] + len(net.children[i])
        child_ids.extend(net.children[i])
    flat.child_off = child_off
    flat.child_ids = np.array(child_ids, dtype=np.int32)

    troot = np.zeros(n, dtype=np.int64)
    tvar = []
    tchild = []
    tprobs = []
    for i in range(n):
        var, child, probs = _flatten_tree_bfs(net.trees[i], net.arities)
        base_node = len(tvar)
        base_prob = len(tprobs)
        troot[i] = base_node
        for v, c in zip(var, child):
            tvar.append(v)
            tchild.append(c + (base_prob if v == -1 else base_node))
        tprobs.extend(probs)
    flat.troot = troot
    flat.tvar = np.array(tvar, dtype=np.int32)
    flat.tchild = np.array(tchild, dtype=np.int64)
    flat.tprobs = np.array(tprobs)
    return flat
