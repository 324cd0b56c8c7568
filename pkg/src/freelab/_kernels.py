"""Compiled kernels for Cauchy sums ``sum_j p_j / (w - x_j)`` and their w-derivative.

``comb_tree_eval`` handles a uniform comb (a grid density) with a 1-d treecode:
boxes of ``leaf * 2**level`` consecutive nodes carry multipole moments about
their centre, normalised by the box radius, and a box is used through its
expansion once ``radius <= theta * |w - centre|``.  Truncation error per box
is below ``mass * theta**K / (|w - c| (1 - theta))``.
"""
import numba
import numpy as np

LEAF = 32
N_TERMS = 24
THETA = 1.0 / 3.0


@numba.njit(cache=True)
def direct_eval(w, nodes, masses, out_g, out_dg):
    n = nodes.shape[0]
    for m in range(w.shape[0]):
        z = w[m]
        g = 0j
        dg = 0j
        for j in range(n):
            inv = 1.0 / (z - nodes[j])
            g += masses[j] * inv
            dg -= masses[j] * inv * inv
        out_g[m] = g
        out_dg[m] = dg


@numba.njit(cache=True)
def comb_tree_eval(w, x0, h, p_pad, leaf, depth, moments, box_offset, theta, out_g, out_dg):
    n_terms = moments.shape[1]
    stack_l = np.empty(4 * (depth + 2), np.int64)
    stack_b = np.empty(4 * (depth + 2), np.int64)
    for m in range(w.shape[0]):
        z = w[m]
        g = 0j
        dg = 0j
        sp = 1
        stack_l[0] = depth
        stack_b[0] = 0
        while sp > 0:
            sp -= 1
            lev = stack_l[sp]
            b = stack_b[sp]
            row = box_offset[lev] + b
            if moments[row, 0] == 0.0:
                continue
            size = leaf << lev
            half = 0.5 * (size - 1)
            c = x0 + (b * size + half) * h
            r = half * h
            d = z - c
            if r <= theta * abs(d):
                q = r / d
                acc = moments[row, n_terms - 1] + 0j
                acc2 = n_terms * moments[row, n_terms - 1] + 0j
                for k in range(n_terms - 2, -1, -1):
                    acc = acc * q + moments[row, k]
                    acc2 = acc2 * q + (k + 1) * moments[row, k]
                inv = 1.0 / d
                g += acc * inv
                dg -= acc2 * inv * inv
            elif lev == 0:
                start = b * size
                for j in range(start, start + size):
                    pj = p_pad[j]
                    if pj != 0.0:
                        inv = 1.0 / (z - (x0 + j * h))
                        g += pj * inv
                        dg -= pj * inv * inv
            else:
                stack_l[sp] = lev - 1
                stack_b[sp] = 2 * b
                stack_l[sp + 1] = lev - 1
                stack_b[sp + 1] = 2 * b + 1
                sp += 2
        out_g[m] = g
        out_dg[m] = dg


class CombTree:
    """Multipole tables for a uniform comb ``p`` on nodes ``x0 + j h``."""

    def __init__(self, x0: float, h: float, p: np.ndarray, leaf: int = LEAF, n_terms: int = N_TERMS):
        n = p.size
        depth = max(0, int(np.ceil(np.log2(max(n, 1) / leaf))))
        n_pad = leaf << depth
        p_pad = np.zeros(n_pad)
        p_pad[:n] = p
        rows = []
        offsets = []
        total = 0
        for lev in range(depth + 1):
            size = leaf << lev
            half = 0.5 * (size - 1)
            u = (np.arange(size) - half) / half
            vander = u[:, None] ** np.arange(n_terms)[None, :]
            offsets.append(total)
            rows.append(p_pad.reshape(-1, size) @ vander)
            total += n_pad // size
        self.x0 = float(x0)
        self.h = float(h)
        self.leaf = leaf
        self.depth = depth
        self.p_pad = p_pad
        self.moments = np.ascontiguousarray(np.vstack(rows))
        self.box_offset = np.array(offsets, dtype=np.int64)

    def evaluate(self, w: np.ndarray, theta: float = THETA):
        w = np.ascontiguousarray(w, dtype=np.complex128).ravel()
        g = np.empty_like(w)
        dg = np.empty_like(w)
        comb_tree_eval(w, self.x0, self.h, self.p_pad, self.leaf, self.depth,
                       self.moments, self.box_offset, theta, g, dg)
        return g, dg


def direct(w: np.ndarray, nodes: np.ndarray, masses: np.ndarray):
    w = np.ascontiguousarray(w, dtype=np.complex128).ravel()
    g = np.empty_like(w)
    dg = np.empty_like(w)
    direct_eval(w, np.ascontiguousarray(nodes, dtype=float), np.ascontiguousarray(masses, dtype=float), g, dg)
    return g, dg
