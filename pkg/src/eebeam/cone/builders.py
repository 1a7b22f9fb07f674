"""SOC-representable building blocks used by the beamforming subproblems.

Affine expressions are (coeffs: dict[var, float], const: float) pairs; the
helpers at the top combine them.  Each log lower bound emits one small cone
block tying an epigraph variable y to log(1+x) around the expansion value
x_n; `*_rows` variants return the raw rows so a caller can rewrite a block
in place between SCA iterations.
"""

import numpy as np

from .program import NONNEG, RSOC, SOC

SQRT2 = float(np.sqrt(2.0))


# --- affine expression helpers ------------------------------------------- #
def ex(coeffs=None, const=0.0):
    return (dict(coeffs) if coeffs else {}, float(const))


def vx(i, scale=1.0):
    return ({int(i): float(scale)}, 0.0)


def exadd(*terms):
    coeffs, const = {}, 0.0
    for c, k in terms:
        const += k
        for i, v in c.items():
            coeffs[i] = coeffs.get(i, 0.0) + v
    return coeffs, const


def exscale(e, s):
    return ({i: v * s for i, v in e[0].items()}, e[1] * s)


def exsub(a, b):
    return exadd(a, exscale(b, -1.0))


# --- generic cone helpers ------------------------------------------------- #
def add_nonneg(prog, rows):
    return prog.add_block(NONNEG, rows)


def add_soc(prog, head, tails):
    return prog.add_block(SOC, [head] + list(tails))


def add_rsoc(prog, p, q, tails):
    return prog.add_block(RSOC, [p, q] + list(tails))


def quad_le_linear_rows(vec, lin):
    """Rows encoding ||vec||^2 <= lin as one SOC block."""
    one = ex(const=1.0)
    return ([exadd(lin, one)]
            + [exscale(v, 2.0) for v in vec]
            + [exsub(lin, one)])


def add_quad_le_linear(prog, vec, lin):
    return prog.add_block(SOC, quad_le_linear_rows(vec, lin))


def add_norm_epigraph(prog, antenna_groups, u_vars, t_expr, inv_eff, const_power):
    """Per-antenna norm bounds plus the linear power coupling.

    For every antenna m: ||stacked per-user entries_m|| <= u_m (SOC), then
    t >= inv_eff * sum_m u_m + const_power (one nonneg row).  Returns
    (soc block ids, coupling block id).
    """
    socs = [add_soc(prog, vx(u), group)
            for u, group in zip(u_vars, antenna_groups)]
    coupling = exadd(t_expr, *[vx(u, -inv_eff) for u in u_vars],
                     ex(const=-const_power))
    return socs, add_nonneg(prog, [coupling])


# --- log lower bounds ------------------------------------------------------ #
def log_lb_product_rows(x, y, x_n):
    """SOC form of d_n*x - c_n >= x*y, the bound on x*log(1+x) >= x*y."""
    if x_n <= 0.0:
        raise ValueError("product log bound needs a positive expansion point")
    c_n = x_n * x_n / (x_n + 1.0)
    d_n = x_n / (x_n + 1.0) + np.log1p(x_n)
    head = exadd(x, exscale(y, -1.0), ex(const=d_n))
    return [head,
            exadd(x, y, ex(const=-d_n)),
            ex(const=2.0 * np.sqrt(c_n))]


def log_lb_shifted_rows(x, y, x_n):
    """SOC form of log(1+x_n) + (x-x_n)/(1+x) >= y."""
    if x_n < 0.0:
        raise ValueError("shifted log bound needs x_n >= 0")
    lognx = float(np.log1p(x_n))
    head = exadd(x, exscale(y, -1.0), ex(const=lognx + 2.0))
    return [head,
            ex(const=2.0 * np.sqrt(1.0 + x_n)),
            exadd(exscale(x, -1.0), exscale(y, -1.0), ex(const=lognx))]


def log_lb_lipschitz_rows(x, y, x_n, c_lip):
    """Rotated-SOC form of the quadratic (Lipschitz) lower bound."""
    if c_lip < 1.0:
        raise ValueError("Lipschitz log bound needs C >= 1")
    if x_n < 0.0:
        raise ValueError("Lipschitz log bound needs x_n >= 0")
    lin = exadd(exscale(exsub(x, ex(const=x_n)), 1.0 / (1.0 + x_n)),
                ex(const=float(np.log1p(x_n))),
                exscale(y, -1.0))
    return [lin, ex(const=1.0 / c_lip), exsub(x, ex(const=x_n))]


_LOG_ROWS = {
    "product": lambda x, y, xn, c: log_lb_product_rows(x, y, xn),
    "shifted": lambda x, y, xn, c: log_lb_shifted_rows(x, y, xn),
    "lipschitz": log_lb_lipschitz_rows,
}
_LOG_KIND = {"product": SOC, "shifted": SOC, "lipschitz": RSOC}


def add_log_lb(prog, bound, x, y, x_n, c_lip=1.0):
    """y <= (surrogate of) log(1+x) around x_n.  bound in {product, shifted,
    lipschitz}.  Returns the block id; rewrite it with update_log_lb."""
    return prog.add_block(_LOG_KIND[bound], _LOG_ROWS[bound](x, y, x_n, c_lip))


def update_log_lb(prog, bid, bound, x, y, x_n, c_lip=1.0):
    for rid, (coeffs, const) in enumerate(_LOG_ROWS[bound](x, y, x_n, c_lip)):
        prog.set_row(bid, rid, coeffs, const)


def log_bound_value(bound, x, x_n, c_lip=1.0):
    """Scalar surrogate value (for tests and diagnostics)."""
    if bound == "product":
        c_n = x_n * x_n / (x_n + 1.0)
        d_n = x_n / (x_n + 1.0) + np.log1p(x_n)
        return (d_n * x - c_n) / x if x > 0 else -np.inf
    if bound == "shifted":
        return np.log1p(x_n) + (x - x_n) / (1.0 + x)
    if bound == "lipschitz":
        return (np.log1p(x_n) + (x - x_n) / (1.0 + x_n)
                - 0.5 * c_lip * (x - x_n) ** 2)
    raise ValueError(bound)


# --- weighted geometric mean ---------------------------------------------- #
_GM_LEVEL = 12  # dyadic exponent resolution 2^-12


def _gm_counts(weights):
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("geometric-mean weights must be positive")
    total = 1 << _GM_LEVEL
    k = np.maximum(1, np.round(w / w.sum() * total).astype(int))
    while k.sum() > total:
        k[int(np.argmax(k))] -= 1
    return k, total


def add_geomean(prog, eta_vars, weights):
    """Epigraph s <= prod eta_b^{w_b / sum w} via a binary tree of rotated
    cones (weights realized as dyadic rationals with resolution 2^-12).
    Returns the epigraph variable s."""
    eta_vars = list(eta_vars)
    s = prog.add_var("gm_root")
    if len(eta_vars) == 1:
        add_nonneg(prog, [exsub(vx(eta_vars[0]), vx(s))])
        return s
    k, total = _gm_counts(weights)
    leaves = [(v, int(c)) for v, c in zip(eta_vars, k)]
    pad = total - int(k.sum())
    if pad:
        leaves.append((s, pad))

    def build(seq, count):
        if len(seq) == 1:
            return seq[0][0]
        half = count // 2
        left, right, acc = [], [], 0
        for var, c in seq:
            if acc >= half:
                right.append((var, c))
            elif acc + c <= half:
                left.append((var, c))
                acc += c
            else:
                left.append((var, half - acc))
                right.append((var, c - (half - acc)))
                acc = half
        a = build(left, half)
        b = build(right, half)
        if a == b:
            return a
        w = prog.add_var("gm")
        add_rsoc(prog, vx(a), vx(b), [vx(w, SQRT2)])
        return w

    root = build(leaves, total)
    add_nonneg(prog, [exsub(vx(root), vx(s))])
    return s
