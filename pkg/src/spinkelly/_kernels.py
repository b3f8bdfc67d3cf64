"""Numba kernels for the hot loops of the solvers.

Everything here is a deterministic function of its inputs; the Python-level
wrappers in `dp` own validation, grid construction and error reporting.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

PI = np.pi
INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
PROB_EPS = 1e-15


@njit(cache=True, inline="always")
def _locate(x, nodes):
    """Segment index b and weight mu with value = mu*F[b] + (1-mu)*F[b+1]."""
    n = nodes.shape[0]
    if x <= nodes[0]:
        return 0, 1.0
    if x >= nodes[n - 1]:
        return n - 2, 0.0
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if nodes[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo, (nodes[lo + 1] - x) / (nodes[lo + 1] - nodes[lo])


@njit(cache=True)
def brute_force_kernel(xi, depth, delta, cand, tol):
    """Exact backward value by recursive per-node angle optimisation.

    No value-function interpolation anywhere: the continuation is recomputed
    recursively on the exact posteriors.  Cost grows as (n_cand * 2)^depth.
    """
    if depth == 0:
        return 0.0

    def obj(alpha):
        c2 = np.cos(alpha) ** 2
        cd2 = np.cos(delta - alpha) ** 2
        up_ref = xi * c2
        up_alt = (1.0 - xi) * cd2
        p = up_ref + up_alt
        if p < 0.0:
            p = 0.0
        if p > 1.0:
            p = 1.0
        q = 1.0 - p
        v = 1.0
        if p > 0.0:
            v += p * np.log2(p)
        if q > 0.0:
            v += q * np.log2(q)
        if depth > 1:
            if p > PROB_EPS:
                xiu = up_ref / p
                if xiu > 1.0:
                    xiu = 1.0
                v += p * brute_force_kernel(xiu, depth - 1, delta, cand, tol)
            if q > PROB_EPS:
                dn_ref = xi * (1.0 - c2)
                dn_tot = dn_ref + (1.0 - xi) * (1.0 - cd2)
                xid = dn_ref / dn_tot if dn_tot > 0.0 else xi
                if xid > 1.0:
                    xid = 1.0
                v += q * brute_force_kernel(xid, depth - 1, delta, cand, tol)
        return v

    n = cand.shape[0]
    best_v = -1e300
    best_i = 0
    for i in range(n):
        v = obj(cand[i])
        if v > best_v:
            best_v = v
            best_i = i
    a = cand[best_i - 1] if best_i > 0 else cand[n - 1] - PI
    b = cand[best_i + 1] if best_i < n - 1 else cand[0] + PI
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = obj(c)
    fd = obj(d)
    while b - a > tol:
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = obj(c)
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = obj(d)
    vm = obj(0.5 * (a + b))
    return vm if vm > best_v else best_v


@njit(cache=True, inline="always")
def _obj2d(U_next, w, xi_nodes, wi, xij, alpha, delta, u_idx, linear_w):
    """Expected next-step utility at one (W, xi) node for one angle.

    Wealth queries outside the grid are folded back by whole octaves using
    the exact shift identity U(2^q * w, xi) = q + U(w, xi).
    """
    n_w = w.shape[0]
    c2 = np.cos(alpha) ** 2
    cd2 = np.cos(delta - alpha) ** 2
    up_ref = xij * c2
    p = up_ref + (1.0 - xij) * cd2
    if p < 0.0:
        p = 0.0
    if p > 1.0:
        p = 1.0
    q = 1.0 - p
    v = 0.0
    for branch in range(2):
        if branch == 0:
            pw = p
            if pw <= PROB_EPS:
                continue
            x_post = up_ref / p
        else:
            pw = q
            if pw <= PROB_EPS:
                continue
            dn_ref = xij * (1.0 - c2)
            dn_tot = dn_ref + (1.0 - xij) * (1.0 - cd2)
            x_post = dn_ref / dn_tot if dn_tot > 0.0 else xij
        if x_post > 1.0:
            x_post = 1.0
        if x_post < 0.0:
            x_post = 0.0
        jb, mu = _locate(x_post, xi_nodes)
        wq = wi * 2.0 * pw
        fold = 0.0
        while wq > w[n_w - 1]:
            wq *= 0.5
            fold += 1.0
        while wq < w[0]:
            wq *= 2.0
            fold -= 1.0
        sb, lam_log = _locate(wq, w)
        if linear_w:
            lam = (w[sb + 1] - wq) / (w[sb + 1] - w[sb])
        else:
            lam = (np.log2(w[sb + 1]) - np.log2(wq)) * u_idx
        if lam < 0.0:
            lam = 0.0
        if lam > 1.0:
            lam = 1.0
        row0 = mu * U_next[sb, jb] + (1.0 - mu) * U_next[sb, jb + 1]
        row1 = mu * U_next[sb + 1, jb] + (1.0 - mu) * U_next[sb + 1, jb + 1]
        v += pw * (fold + lam * row0 + (1.0 - lam) * row1)
    return v


@njit(cache=True, parallel=True)
def solve2d_step(U_next, w, xi_nodes, delta, cand, alpha_tol, linear_w, golden, U_out):
    """One backward step of the utility-surface recursion.

    Per column (prior node): a coarse scan shared across wealth rows, with
    per-(angle, branch) interpolation constants hoisted out of the row loop;
    then per-node refinement (parabolic vertex by default, golden section when
    `golden`).  Returns the number of wealth queries from interior rows that
    left the grid and were octave-folded.
    """
    n_w = w.shape[0]
    n_xi = xi_nodes.shape[0]
    nc = cand.shape[0]
    lwmin = np.log2(w[0])
    lwmax = np.log2(w[n_w - 1])
    dlw = (lwmax - lwmin) / (n_w - 1)
    u_idx = 1.0 / dlw  # grid index steps per octave
    e_seg = np.exp2(dlw)
    folded_total = 0
    for j in prange(n_xi):
        xij = xi_nodes[j]
        vals = np.zeros((nc, n_w))
        mix = np.empty(n_w)
        folded = 0
        for ci in range(nc):
            alpha = cand[ci]
            c2 = np.cos(alpha) ** 2
            cd2 = np.cos(delta - alpha) ** 2
            up_ref = xij * c2
            p = up_ref + (1.0 - xij) * cd2
            if p < 0.0:
                p = 0.0
            if p > 1.0:
                p = 1.0
            q = 1.0 - p
            row = vals[ci]
            for branch in range(2):
                if branch == 0:
                    pw = p
                    if pw <= PROB_EPS:
                        continue
                    x_post = up_ref / p
                else:
                    pw = q
                    if pw <= PROB_EPS:
                        continue
                    dn_ref = xij * (1.0 - c2)
                    dn_tot = dn_ref + (1.0 - xij) * (1.0 - cd2)
                    x_post = dn_ref / dn_tot if dn_tot > 0.0 else xij
                if x_post > 1.0:
                    x_post = 1.0
                if x_post < 0.0:
                    x_post = 0.0
                jb, mu = _locate(x_post, xi_nodes)
                for s in range(n_w):
                    mix[s] = mu * U_next[s, jb] + (1.0 - mu) * U_next[s, jb + 1]
                tdiv = np.log2(2.0 * pw) * u_idx  # query offset in index units
                i = 0
                while i < n_w:
                    q0 = i + tdiv
                    if q0 > n_w - 1.0:
                        f = int(np.ceil((q0 - (n_w - 1.0)) / u_idx))
                    elif q0 < 0.0:
                        f = -int(np.ceil(-q0 / u_idx))
                    else:
                        f = 0
                    if f != 0 and i < n_w - 1:
                        folded += 1
                    shift = tdiv - f * u_idx
                    i_hi = int(np.floor(n_w - 1.0 - shift))
                    if i_hi < i:
                        i_hi = i
                    if i_hi > n_w - 1:
                        i_hi = n_w - 1
                    k = int(np.floor(shift))
                    frac = shift - k
                    if linear_w:
                        lam = (e_seg - np.exp2(frac * dlw)) / (e_seg - 1.0)
                    else:
                        lam = 1.0 - frac
                    if lam < 0.0:
                        lam = 0.0
                    if lam > 1.0:
                        lam = 1.0
                    for ii in range(i, i_hi + 1):
                        s = ii + k
                        if s >= n_w - 1:
                            row[ii] += pw * (f + mix[n_w - 1])
                        elif s < 0:
                            row[ii] += pw * (f + mix[0])
                        else:
                            row[ii] += pw * (f + lam * mix[s] + (1.0 - lam) * mix[s + 1])
                    i = i_hi + 1
        # per-node refinement
        for i in range(n_w):
            best_ci = 0
            bv = vals[0, i]
            for ci in range(1, nc):
                if vals[ci, i] > bv:
                    bv = vals[ci, i]
                    best_ci = ci
            x1 = cand[best_ci]
            if best_ci > 0:
                x0 = cand[best_ci - 1]
                f0 = vals[best_ci - 1, i]
            else:
                x0 = cand[nc - 1] - PI
                f0 = vals[nc - 1, i]
            if best_ci < nc - 1:
                x2 = cand[best_ci + 1]
                f2 = vals[best_ci + 1, i]
            else:
                x2 = cand[0] + PI
                f2 = vals[0, i]
            out = bv
            if golden:
                a = x0
                b = x2
                c = b - INVPHI * (b - a)
                d = a + INVPHI * (b - a)
                fc = _obj2d(U_next, w, xi_nodes, w[i], xij, c % PI, delta, u_idx, linear_w)
                fd = _obj2d(U_next, w, xi_nodes, w[i], xij, d % PI, delta, u_idx, linear_w)
                while b - a > alpha_tol:
                    if fc >= fd:
                        b = d
                        d = c
                        fd = fc
                        c = b - INVPHI * (b - a)
                        fc = _obj2d(U_next, w, xi_nodes, w[i], xij, c % PI, delta, u_idx, linear_w)
                    else:
                        a = c
                        c = d
                        fc = fd
                        d = a + INVPHI * (b - a)
                        fd = _obj2d(U_next, w, xi_nodes, w[i], xij, d % PI, delta, u_idx, linear_w)
                vm = _obj2d(U_next, w, xi_nodes, w[i], xij, (0.5 * (a + b)) % PI, delta, u_idx, linear_w)
                if vm > out:
                    out = vm
            else:
                # successive parabolic interpolation: three vertex steps give
                # angle accuracy far below the wealth-interpolation scale at
                # a small fraction of golden section's cost
                f1 = bv
                for _ in range(3):
                    d10 = x1 - x0
                    d12 = x1 - x2
                    num = d10 * d10 * (f1 - f2) - d12 * d12 * (f1 - f0)
                    den = d10 * (f1 - f2) - d12 * (f1 - f0)
                    if np.abs(den) <= 0.0:
                        break
                    xs = x1 - 0.5 * num / den
                    if not (xs > x0 and xs < x2) or xs == x1:
                        break
                    fs = _obj2d(U_next, w, xi_nodes, w[i], xij, xs % PI, delta, u_idx, linear_w)
                    if fs > f1:
                        if xs > x1:
                            x0 = x1
                            f0 = f1
                        else:
                            x2 = x1
                            f2 = f1
                        x1 = xs
                        f1 = fs
                    else:
                        if xs > x1:
                            x2 = xs
                            f2 = fs
                        else:
                            x0 = xs
                            f0 = fs
                if f1 > out:
                    out = f1
            U_out[i, j] = out
        folded_total += folded
    return folded_total
