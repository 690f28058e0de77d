# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling loops.

This module mirrors ``samplers._run_python`` operation for operation: the
same PCG64 stream is consumed in the same order and every floating-point
expression is written with the same association, so a run produces
bit-identical estimates and counters on either backend.  Keep the two in
lockstep when changing either.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int32_t, int64_t
from numpy.random cimport bitgen_t

import numpy as np

from .errors import DegenerateBlanketError

SCHEME_SIMPLE = 0
SCHEME_LIKELIHOOD = 1
SCHEME_PEARL = 2
SCHEME_STRAT_SIMPLE = 3
SCHEME_STRAT_LIKELIHOOD = 4


cdef class Kernel:
    cdef:
        int n, max_arity, use_tree
        int32_t[::1] arity, ev_val, order, par_ids, child_ids, tvar
        int64_t[::1] par_off, par_stride, cpt_off, child_off, troot, tchild
        double[::1] cpt_vals, tprobs
        bitgen_t *rng
        object _keep
        int64_t assignments, init_assignments, comparisons, lookups

    def __init__(self, flat, bit_generator):
        self.n = flat.n
        self.max_arity = flat.max_arity
        self.use_tree = flat.use_tree
        self.arity = flat.arity
        self.ev_val = flat.ev_val
        self.order = flat.order
        self.par_ids = flat.par_ids
        self.par_stride = flat.par_stride
        self.par_off = flat.par_off
        self.cpt_off = flat.cpt_off
        self.cpt_vals = flat.cpt_vals
        self.child_off = flat.child_off
        self.child_ids = flat.child_ids
        self.troot = flat.troot
        self.tvar = flat.tvar
        self.tchild = flat.tchild
        self.tprobs = flat.tprobs
        self._keep = (flat, bit_generator)
        self.rng = <bitgen_t *> PyCapsule_GetPointer(
            bit_generator.capsule, "BitGenerator")
        self.assignments = 0
        self.init_assignments = 0
        self.comparisons = 0
        self.lookups = 0

    cdef inline double _next(self):
        return self.rng.next_double(self.rng.state)

    cdef inline double* _row(self, int var, int32_t *val):
        cdef int64_t node, idx, k
        if self.use_tree:
            node = self.troot[var]
            while self.tvar[node] >= 0:
                node = self.tchild[node] + val[self.tvar[node]]
            return &self.tprobs[self.tchild[node]]
        idx = 0
        for k in range(self.par_off[var], self.par_off[var + 1]):
            idx += self.par_stride[k] * val[self.par_ids[k]]
        return &self.cpt_vals[self.cpt_off[var] + idx * self.arity[var]]

    cdef inline int _categorical(self, double *row, int arity, double u):
        cdef double acc = 0.0
        cdef int v
        for v in range(arity - 1):
            acc += row[v]
            if u < acc:
                return v
        return arity - 1

    cdef int _blanket_row(self, int32_t *val, int x, double *out,
                          double *total) except -1:
        cdef int arity = self.arity[x]
        cdef double *own = self._row(x, val)
        cdef int saved = val[x]
        cdef double t = 0.0
        cdef double w
        cdef int v, c
        cdef int64_t ci
        self.lookups += 1
        for v in range(arity):
            val[x] = v
            w = own[v]
            for ci in range(self.child_off[x], self.child_off[x + 1]):
                c = self.child_ids[ci]
                w *= self._row(c, val)[val[c]]
                self.lookups += 1
            out[v] = w
            t += w
        val[x] = saved
        if t <= 0.0:
            raise DegenerateBlanketError(
                "Markov blanket has zero mass for every value of variable "
                f"{x}")
        total[0] = t
        return 0

    cdef int _score_blanket(self, double[:, ::1] table, int32_t *val,
                            double p, double *out) except -1:
        cdef int i, v
        cdef double total
        for i in range(self.n):
            if self.ev_val[i] >= 0:
                table[i, val[i]] += p
            else:
                self._blanket_row(val, i, out, &total)
                for v in range(self.arity[i]):
                    table[i, v] += p * (out[v] / total)
        return 0

    cdef int _pearl_sweep(self, int32_t *val, double *out,
                          double[:, ::1] table, int score_blanket) except -1:
        cdef int k, x, v
        cdef double total
        for k in range(self.n):
            x = self.order[k]
            if self.ev_val[x] >= 0:
                continue
            self._blanket_row(val, x, out, &total)
            val[x] = self._categorical(out, self.arity[x],
                                       self._next() * total)
            self.assignments += 1
            if score_blanket:
                for v in range(self.arity[x]):
                    table[x, v] += out[v] / total
        return 0

    cdef int _restart(self, double *h, double f, int anchor):
        cdef int n = self.n
        cdef int comps = 0, lo = 1, hi = n + 1, mid
        cdef int bl = 0, nn = n, limit
        while nn:
            nn >>= 1
            bl += 1
        limit = (1 << (bl - 1)) + 2
        if limit > n:
            limit = n
        if 3 <= anchor <= limit:
            comps += 1
            if h[anchor] < f:
                hi = anchor
                comps += 1
                if h[anchor - 2] < f:
                    hi = anchor - 2
                else:
                    lo = anchor - 1
            else:
                lo = anchor + 1
        while lo < hi:
            mid = (lo + hi) >> 1
            comps += 1
            if h[mid] < f:
                hi = mid
            else:
                lo = mid + 1
        self.comparisons += comps
        return lo

    cdef double _run_forward(self, int scheme, int blanket, int64_t m,
                             double[:, ::1] table, int32_t *val,
                             double *out) except? -1.0:
        cdef double total_weight = 0.0
        cdef double p, u
        cdef double *row
        cdef int64_t s
        cdef int i, k, x, a, v
        for s in range(m):
            if scheme == SCHEME_SIMPLE:
                for i in range(self.n):
                    if self.ev_val[i] >= 0:
                        val[i] = self.ev_val[i]
                    else:
                        a = self.arity[i]
                        v = <int> (self._next() * a)
                        if v >= a:
                            v = a - 1
                        val[i] = v
                        self.assignments += 1
                p = 1.0
                for i in range(self.n):
                    p *= self._row(i, val)[val[i]]
                    self.lookups += 1
            else:
                p = 1.0
                for k in range(self.n):
                    x = self.order[k]
                    row = self._row(x, val)
                    self.lookups += 1
                    if self.ev_val[x] >= 0:
                        val[x] = self.ev_val[x]
                        p *= row[self.ev_val[x]]
                    else:
                        val[x] = self._categorical(row, self.arity[x],
                                                   self._next())
                        self.assignments += 1
            total_weight += p
            if blanket:
                self._score_blanket(table, val, p, out)
            else:
                for i in range(self.n):
                    table[i, val[i]] += p
        return total_weight

    cdef double _run_pearl(self, int blanket, int64_t m, int64_t burn_in,
                           double[:, ::1] table, int32_t *val,
                           double *out) except? -1.0:
        cdef double total_weight = 0.0
        cdef double *row
        cdef int64_t s, before = self.assignments
        cdef int i, k, x
        # initial instantiation by forward sampling, then unscored sweeps
        for k in range(self.n):
            x = self.order[k]
            row = self._row(x, val)
            self.lookups += 1
            if self.ev_val[x] >= 0:
                val[x] = self.ev_val[x]
            else:
                val[x] = self._categorical(row, self.arity[x], self._next())
                self.assignments += 1
        for s in range(burn_in):
            self._pearl_sweep(val, out, table, 0)
        self.init_assignments += self.assignments - before
        self.assignments = before
        for s in range(m):
            self._pearl_sweep(val, out, table, blanket)
            total_weight += 1.0
            if blanket:
                for i in range(self.n):
                    if self.ev_val[i] >= 0:
                        table[i, val[i]] += 1.0
            else:
                for i in range(self.n):
                    table[i, val[i]] += 1.0
        return total_weight

    cdef double _run_strat(self, int conditional, int blanket, int64_t m,
                           int point_random, double[:, ::1] table,
                           int32_t *val, double *l, double *h,
                           double *out) except? -1.0:
        cdef double total_weight = 0.0
        cdef double p, u, f, width, pt, lj, hj
        cdef double *row
        cdef int64_t i_strat, mm
        cdef int i, j, x, a, k, anchor = 0, depth = 0, free_seen = 0
        mm = m
        while mm > 1:
            mm >>= 1
            depth += 1
        for i in range(self.n):
            val[i] = self.ev_val[i] if self.ev_val[i] >= 0 else 0
        for j in range(self.n + 1):
            l[j] = 0.0
        h[0] = 1.0
        for j in range(1, self.n + 1):
            x = self.order[j - 1]
            if self.ev_val[x] >= 0:
                h[j] = h[j - 1]
                continue
            if conditional:
                pt = self._row(x, val)[0]
                self.lookups += 1
            else:
                pt = 1.0 / self.arity[x]
            h[j] = h[j - 1] * pt
            self.init_assignments += 1
            if free_seen == depth:
                anchor = j
            free_seen += 1

        for i_strat in range(1, m + 1):
            u = self._next() if point_random else 0.5
            f = (u + <double> (i_strat - 1)) / <double> m
            j = self._restart(h, f, anchor)
            while j <= self.n:
                x = self.order[j - 1]
                if self.ev_val[x] >= 0:
                    l[j] = l[j - 1]
                    h[j] = h[j - 1]
                else:
                    a = self.arity[x]
                    width = h[j - 1] - l[j - 1]
                    if conditional:
                        row = self._row(x, val)
                        self.lookups += 1
                        pt = row[0]
                    else:
                        row = NULL
                        pt = 1.0 / a
                    k = 0
                    lj = l[j - 1]
                    hj = lj + width * pt
                    while f > hj and k < a - 1:
                        k += 1
                        lj = hj
                        pt = (1.0 / a) if row == NULL else row[k]
                        hj = lj + width * pt
                    if f > hj:
                        hj = h[j - 1]
                    val[x] = k
                    l[j] = lj
                    h[j] = hj
                    self.assignments += 1
                j += 1
            if conditional:
                p = 1.0
                for i in range(self.n):
                    if self.ev_val[i] >= 0:
                        p *= self._row(i, val)[self.ev_val[i]]
                        self.lookups += 1
            else:
                p = 1.0
                for i in range(self.n):
                    p *= self._row(i, val)[val[i]]
                    self.lookups += 1
                    if self.ev_val[i] < 0:
                        p *= self.arity[i]
            total_weight += p
            if blanket:
                self._score_blanket(table, val, p, out)
            else:
                for i in range(self.n):
                    table[i, val[i]] += p
        return total_weight

    def run(self, int scheme, int blanket, int64_t m, int point_random,
            int64_t burn_in, double[:, ::1] table):
        cdef int32_t[::1] val = np.zeros(self.n, dtype=np.int32)
        cdef double[::1] lbuf = np.zeros(self.n + 1)
        cdef double[::1] hbuf = np.zeros(self.n + 1)
        cdef double[::1] out = np.zeros(max(self.max_arity, 1))
        cdef double total
        if scheme == SCHEME_SIMPLE or scheme == SCHEME_LIKELIHOOD:
            total = self._run_forward(scheme, blanket, m, table, &val[0],
                                      &out[0])
        elif scheme == SCHEME_PEARL:
            total = self._run_pearl(blanket, m, burn_in, table, &val[0],
                                    &out[0])
        else:
            total = self._run_strat(scheme == SCHEME_STRAT_LIKELIHOOD,
                                    blanket, m, point_random, table,
                                    &val[0], &lbuf[0], &hbuf[0], &out[0])
        return total

    def counters(self):
        return (self.assignments, self.init_assignments, self.comparisons,
                self.lookups)
