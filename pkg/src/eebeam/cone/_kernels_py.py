"""Pure-numpy cone kernels (fallback backend).

Same API as the compiled extension `_kernels_cy`.  All per-block work is
vectorized with segmented reductions so the fallback stays usable when the
extension is not built.

Conventions: vectors live in the flat layout of `_layout.Layout` (nonneg
part first, then SOC blocks).  The Nesterov-Todd scaling of a point pair
(s, z) is packed as (w_nn, eta, wbar): diag weights for the nonneg part,
one scale factor per SOC block and the unit-hyperbolic scaling point wbar.
"""

import numpy as np

BIG_STEP = 1e20


class ScalingError(RuntimeError):
    """Raised when an iterate leaves the cone interior."""


def scaling(s, z, lay):
    """NT scaling of (s, z) plus the scaled point lam = W z = W^{-1} s."""
    l = lay.l
    w_nn = np.sqrt(s[:l] / z[:l]) if l else np.zeros(0)
    if lay.nsoc == 0:
        lam = np.empty(lay.m)
        lam[:l] = np.sqrt(s[:l] * z[:l])
        return w_nn, np.zeros(0), np.zeros(0), lam

    ss, zz = s[l:], z[l:]
    s0, z0 = ss[lay.rel], zz[lay.rel]
    a_s = 2.0 * s0 * s0 - lay.blocksum(ss * ss)
    a_z = 2.0 * z0 * z0 - lay.blocksum(zz * zz)
    if np.any(a_s <= 0.0) or np.any(a_z <= 0.0) or np.any(s[:l] <= 0.0) or np.any(z[:l] <= 0.0):
        raise ScalingError("point left the cone interior")
    rs, rz = np.sqrt(a_s), np.sqrt(a_z)
    sbar = ss / rs[lay.rep]
    zbar = zz / rz[lay.rep]
    dot = lay.blocksum(sbar * zbar)
    gamma = np.sqrt((1.0 + dot) / 2.0)
    zbar_j = np.where(lay.head_mask, zbar, -zbar)
    wbar = (sbar + zbar_j) / (2.0 * gamma[lay.rep])
    eta = (a_s / a_z) ** 0.25

    lam = np.empty(lay.m)
    lam[:l] = np.sqrt(s[:l] * z[:l])
    lam[l:] = _soc_apply_w(eta, wbar, zz, lay, inv=False)
    return w_nn, eta, wbar, lam


def _soc_apply_w(eta, wbar, x, lay, inv):
    """eta*T(wbar) x (or its inverse) on the SOC slice."""
    x0 = x[lay.rel]
    w0 = wbar[lay.rel]
    c = lay.blocksum(wbar * x)
    if inv:
        c = 2.0 * w0 * x0 - c
    d = x0 + (c - w0 * x0) / (1.0 + w0)
    sign = -1.0 if inv else 1.0
    out = x + sign * d[lay.rep] * wbar
    out[lay.rel] = c
    if inv:
        return out / eta[lay.rep]
    return out * eta[lay.rep]


def apply_w(w_nn, eta, wbar, x, lay, inv=False):
    """W x (inv=False) or W^{-1} x (inv=True)."""
    out = np.empty(lay.m)
    l = lay.l
    if l:
        out[:l] = x[:l] / w_nn if inv else x[:l] * w_nn
    if lay.nsoc:
        out[l:] = _soc_apply_w(eta, wbar, x[l:], lay, inv)
    return out


def apply_w2(w_nn, eta, wbar, x, lay, inv=False):
    """W^2 x or W^{-2} x using the rank-one-plus-J structure."""
    out = np.empty(lay.m)
    l = lay.l
    if l:
        ww = w_nn * w_nn
        out[:l] = x[:l] / ww if inv else x[:l] * ww
    if lay.nsoc:
        xs = x[l:]
        x0 = xs[lay.rel]
        w0 = wbar[lay.rel]
        c = lay.blocksum(wbar * xs)
        if inv:
            c = 2.0 * w0 * x0 - c
            y = -2.0 * c[lay.rep] * wbar + xs
            y[lay.rel] = 2.0 * w0 * c - x0
            out[l:] = y / (eta * eta)[lay.rep]
        else:
            y = 2.0 * c[lay.rep] * wbar + xs
            y[lay.rel] = 2.0 * w0 * c - x0
            out[l:] = y * (eta * eta)[lay.rep]
    return out


def jmul(u, v, lay):
    """Jordan product u o v."""
    out = np.empty(lay.m)
    l = lay.l
    out[:l] = u[:l] * v[:l]
    if lay.nsoc:
        uu, vv = u[l:], v[l:]
        u0, v0 = uu[lay.rel], vv[lay.rel]
        out[l:] = u0[lay.rep] * vv + v0[lay.rep] * uu
        out[l:][lay.rel] = lay.blocksum(uu * vv)
    return out


def jsolve(lam, r, lay):
    """Solve lam o u = r for u."""
    out = np.empty(lay.m)
    l = lay.l
    out[:l] = r[:l] / lam[:l]
    if lay.nsoc:
        ll, rr = lam[l:], r[l:]
        l0, r0 = ll[lay.rel], rr[lay.rel]
        det = 2.0 * l0 * l0 - lay.blocksum(ll * ll)
        dotj = 2.0 * l0 * r0 - lay.blocksum(ll * rr)
        u0 = dotj / det
        u = (rr - u0[lay.rep] * ll) / l0[lay.rep]
        u[lay.rel] = u0
        out[l:] = u
    return out


def max_step(x, dx, lay):
    """Largest alpha >= 0 keeping x + alpha*dx inside the cone."""
    alpha = BIG_STEP
    l = lay.l
    if l:
        neg = dx[:l] < 0.0
        if np.any(neg):
            alpha = min(alpha, float(np.min(-x[:l][neg] / dx[:l][neg])))
    if lay.nsoc:
        xs, ds = x[l:], dx[l:]
        x0, d0 = xs[lay.rel], ds[lay.rel]
        a = 2.0 * d0 * d0 - lay.blocksum(ds * ds)
        b = 2.0 * (2.0 * x0 * d0 - lay.blocksum(xs * ds))
        c = 2.0 * x0 * x0 - lay.blocksum(xs * xs)
        c = np.maximum(c, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = b * b - 4.0 * a * c
            sq = np.sqrt(np.maximum(disc, 0.0))
            q = -(b + np.copysign(sq, b)) / 2.0
            r1 = np.where(np.abs(a) > 0.0, q / np.where(a == 0.0, 1.0, a), np.inf)
            r2 = np.where(np.abs(q) > 0.0, c / np.where(q == 0.0, 1.0, q), np.inf)
        roots = np.stack([r1, r2])
        # A root only bounds the step when it is real and nonnegative.
        roots = np.where((disc[None, :] >= 0.0) & (roots >= 0.0), roots, np.inf)
        block_bound = roots.min(axis=0)
        # Linear case a == 0: single root -c/b when b < 0.
        lin = (a == 0.0)
        if np.any(lin):
            lin_root = np.where(b < 0.0, -c / np.where(b == 0.0, -1.0, b), np.inf)
            block_bound = np.where(lin, lin_root, block_bound)
        if block_bound.size:
            alpha = min(alpha, float(block_bound.min()))
    return alpha


def min_margin(x, lay):
    """Distance to the cone boundary: min over nonneg entries and SOC margins."""
    margin = np.inf
    l = lay.l
    if l:
        margin = float(np.min(x[:l]))
    if lay.nsoc:
        xs = x[l:]
        x0 = xs[lay.rel]
        tail = np.sqrt(np.maximum(lay.blocksum(xs * xs) - x0 * x0, 0.0))
        margin = min(margin, float(np.min(x0 - tail)))
    return margin
