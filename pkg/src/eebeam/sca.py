"""Successive convex approximation for the four EE beamforming designs.

The epigraph form introduces slacks (eta, z, t, g): eta <= z^2/t bounds the
EE, z^2 <= sum log(1+g) the cell rate (natural log internally), t the cell
power, and g the per-user SINR.  Each iteration convexifies the two
quadratic-over-linear constraints with their first-order (Example-1 style)
upper bounds and the log constraint with one of three SOC-representable
lower bounds, solves the resulting cone program, and adopts the optimum as
the next expansion point.  The true metric (re-evaluated from the
beamformers) is tracked per iteration and must be nondecreasing.

Internal units: channels are normalized by the noise standard deviation
(so sigma^2 = 1), rates are in nats (no bandwidth factor) and powers in
Watts; reported efficiencies are converted to bits/J via bandwidth/ln 2.

Only the expansion-point-dependent rows are rewritten between iterations,
so the solver's cached factorization structure is reused across the run.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import power as pw
from .cone import builders as cb
from .cone import program as cp
from .cone.solver import CachedSolver, OPTIMAL
from .units import LN2

OBJECTIVES = ("nee", "swee", "wpee", "maxmin")
FP_MODES = ("fp_nee", "fp_swee", "fp_maxmin")
CELLWISE = ("swee", "wpee", "maxmin", "fp_swee", "fp_maxmin")


@dataclass(frozen=True)
class SCAConfig:
    objective: str = "nee"
    log_bound: str = "shifted"        # product | shifted | lipschitz
    lipschitz_c: float = 1.0
    obj_tol: float = 1e-5             # relative increase of the true metric
    max_iter: int = 200
    solver_tol: float = 1e-8
    weights: tuple = None             # per-BS priorities, default all 1
    power: pw.PowerModelConfig = pw.PowerModelConfig()
    multi_start: int = 1
    z_min: float = 1e-6
    init_margin: float = 1.2

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.log_bound not in ("product", "shifted", "lipschitz"):
            raise ValueError("unknown log bound")
        if self.obj_tol <= 0:
            raise ValueError("obj_tol must be positive")


@dataclass
class EpigraphPoint:
    """Expansion point of one SCA iteration; slacks strictly positive."""

    v: np.ndarray               # (B, U, M) complex
    g: np.ndarray               # (B, U) SINR slacks
    z: np.ndarray               # sqrt-rate slacks (per cell, or length 1)
    t: np.ndarray               # power slacks (per cell, or length 1)
    eta: np.ndarray             # EE epigraph (per cell, or length 1)
    beta: np.ndarray = None     # per-user rate slacks (nats)
    u_ant: np.ndarray = None    # per-antenna norm slacks (nonlinear PA)
    s_rd: np.ndarray = None     # power-plus-SP slacks (rate-dependent)


@dataclass
class SCATrace:
    objective: list = field(default_factory=list)        # bits/J (true metric)
    objective_internal: list = field(default_factory=list)
    surrogate: list = field(default_factory=list)
    max_violation: list = field(default_factory=list)
    solver_status: list = field(default_factory=list)
    solver_iters: list = field(default_factory=list)
    converged: bool = False
    status: str = "ok"
    wall_time: float = 0.0
    conic_solves: int = 0
    activeness: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.objective)

    def is_monotone(self, slack=1e-7):
        o = self.objective_internal
        return all(o[i + 1] - o[i] >= -slack * max(1.0, abs(o[i]))
                   for i in range(len(o) - 1))

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("iter,objective_bits_per_joule,surrogate_obj,"
                    "max_violation,solver_iters,status\n")
            for i in range(self.iterations):
                f.write(f"{i},{self.objective[i]:.10g},{self.surrogate[i]:.10g},"
                        f"{self.max_violation[i]:.3e},{self.solver_iters[i]},"
                        f"{self.solver_status[i]}\n")


class ProblemData:
    """Noise-normalized instance shared by the SCA, FP and ADMM solvers."""

    def __init__(self, ch, budget: pw.PowerBudget, cfg: SCAConfig):
        self.B, self.U, self.M = ch.num_bs, ch.users_per_cell, ch.antennas
        sigma = np.sqrt(ch.noise_w)                      # (B, U)
        self.hn = ch.h / sigma[None, :, :, None]
        self.budget = budget
        self.cfg = cfg
        self.weights = np.ones(self.B) if cfg.weights is None else \
            np.asarray(cfg.weights, dtype=float)
        if self.weights.shape != (self.B,):
            raise ValueError("need one weight per BS")
        pc = cfg.power
        self.power_cfg = pc
        self.nonlinear_pa = isinstance(pc.pa, pw.NonlinearPA)
        if self.nonlinear_pa:
            self.inv_eff = 1.0 / pc.pa.eps_tilde
        else:
            self.inv_eff = 1.0 / pc.pa.efficiency
        # Constant per-cell power (circuit + fixed SP when applicable).
        self.c_cell = pw.circuit_power(self.M, self.U, pc) + (
            0.0 if pc.rate_dependent else pc.sp_fixed_w)
        bw = ch.meta.get("bandwidth_hz")
        if bw is None:
            raise ValueError("channel set lacks bandwidth metadata")
        self.bandwidth_hz = float(bw)
        self.bits_scale = self.bandwidth_hz / LN2        # nats -> bits/s
        # Rate-dependent SP power per internal rate unit (Watts per nat).
        self.c_rd = pc.p_sp_w_per_gbit * self.bits_scale / 1e9 \
            if pc.rate_dependent else 0.0

    # -- evaluation in internal units ----------------------------------- #
    def sinr(self, v):
        amp = np.einsum("kbum,kim->kibu", self.hn, v)
        p = np.abs(amp) ** 2
        total = p.sum(axis=(0, 1))
        idx_b = np.arange(self.B)[:, None]
        idx_u = np.arange(self.U)[None, :]
        own = p[idx_b, idx_u, idx_b, idx_u]
        return own / (total - own + 1.0)

    def rates_int(self, v):
        return np.log1p(self.sinr(v))

    def cell_power_hw(self, v):
        """Circuit plus PA power (the t-slack part), per cell."""
        out = np.empty(self.B)
        for b in range(self.B):
            if self.nonlinear_pa:
                per_ant = np.sum(np.abs(v[b]) ** 2, axis=0)
                out[b] = self.c_cell + self.inv_eff * np.sum(np.sqrt(per_ant))
            else:
                out[b] = self.c_cell + self.inv_eff * np.sum(np.abs(v[b]) ** 2)
        return out

    def cell_power(self, v, r_int=None):
        p = self.cell_power_hw(v)
        if self.c_rd:
            r_int = self.rates_int(v) if r_int is None else r_int
            p = p + self.c_rd * r_int.sum(axis=1)
        return p

    def cell_ee_int(self, v):
        r = self.rates_int(v)
        return r.sum(axis=1) / self.cell_power(v, r)

    def internal_objective(self, v, objective=None):
        objective = objective or self.cfg.objective
        r = self.rates_int(v)
        p = self.cell_power(v, r)
        cr = r.sum(axis=1)
        if objective == "nee":
            return float(cr.sum() / p.sum())
        ee = cr / p
        if objective == "swee":
            return float(np.sum(self.weights * ee))
        if objective == "wpee":
            wn = self.weights / self.weights.sum()
            return float(np.prod(ee**wn))
        if objective == "maxmin":
            return float(ee.min())
        raise ValueError(objective)

    def objective_bits(self, v, objective=None):
        """True metric in bits/J (geometric-mean EE for wpee)."""
        return self.internal_objective(v, objective) * self.bits_scale


def init_feasible(ch, budget, cfg: SCAConfig, seed=0) -> EpigraphPoint:
    """Random beamformers scaled inside the power constraints with margin,
    slacks set tight so every surrogate has a valid expansion point."""
    rng = seed if isinstance(seed, np.random.Generator) else \
        np.random.default_rng(seed)
    data = ProblemData(ch, budget, cfg)
    B, U, M = data.B, data.U, data.M
    v = (rng.standard_normal((B, U, M)) + 1j * rng.standard_normal((B, U, M)))
    for b in range(B):
        tot = np.sum(np.abs(v[b]) ** 2)
        per_ant = np.sum(np.abs(v[b]) ** 2, axis=0)
        scale = min(budget.per_bs_w / (cfg.init_margin * tot),
                    budget.per_antenna_w / (cfg.init_margin * per_ant.max()))
        v[b] *= np.sqrt(scale)
    return tighten_point(data, v)


def tighten_point(data: ProblemData, v) -> EpigraphPoint:
    """Slacks set to their tight values at v (always feasible)."""
    cfg = data.cfg
    g = np.maximum(data.sinr(v), 1e-12)
    r = np.log1p(g)
    cellwise = cfg.objective in CELLWISE
    if cellwise:
        z = np.sqrt(np.maximum(r.sum(axis=1), cfg.z_min**2))
        t = data.cell_power_hw(v)
    else:
        z = np.array([max(np.sqrt(r.sum()), cfg.z_min)])
        t = np.array([data.cell_power_hw(v).sum()])
    s_rd = None
    denom = t
    if data.c_rd and cellwise:
        s_rd = t + data.c_rd * z**2
        denom = s_rd
    eta = z**2 / denom
    if cfg.objective == "maxmin":
        eta = np.array([eta.min()])
    u_ant = None
    if data.nonlinear_pa:
        u_ant = np.sqrt(np.einsum("bum->bm", np.abs(v) ** 2))
    return EpigraphPoint(v=v, g=g, z=z, t=t, eta=eta, beta=r.copy(),
                         u_ant=u_ant, s_rd=s_rd)


class SubproblemBuilder:
    """Builds the convex subproblem once, then rewrites only the rows that
    depend on the expansion point.  Also serves the FP baselines, which use
    the same machinery with a parametric linear objective instead of the
    EE epigraph."""

    def __init__(self, data: ProblemData, mode=None):
        self.data = data
        self.cfg = data.cfg
        self.mode = mode or self.cfg.objective
        if self.mode not in OBJECTIVES + FP_MODES:
            raise ValueError(f"unknown mode {self.mode}")
        self.cellwise = self.mode in CELLWISE
        self.rate_dep = data.c_rd > 0 or (data.power_cfg.rate_dependent
                                          and self.cellwise)
        self.prog = None

    # ---------------------------------------------------------------- #
    def build(self, point: EpigraphPoint):
        data, cfg = self.data, self.cfg
        B, U, M = data.B, data.U, data.M
        prog = cp.ConeProgram()
        self.prog = prog

        self.vr = prog.add_vars("vr", B * U * M).reshape(B, U, M)
        self.vi = prog.add_vars("vi", B * U * M).reshape(B, U, M)
        self.g = prog.add_vars("g", B * U).reshape(B, U)
        self.beta = prog.add_vars("beta", B * U).reshape(B, U)
        has_ee = self.mode in OBJECTIVES
        ncell = B if self.cellwise else 1
        self.z = prog.add_vars("z", ncell) if has_ee else None
        self.t = prog.add_vars("t", ncell)
        if has_ee:
            neta = B if self.mode in ("swee", "wpee") else 1
            self.eta = prog.add_vars("eta", neta)
        if data.nonlinear_pa:
            self.u_ant = prog.add_vars("u", B * M).reshape(B, M)
        else:
            self.w_pa = prog.add_vars("w_pa", B)
        self.s_rd = prog.add_vars("s", ncell) if (self.rate_dep and has_ee) \
            else None
        self.zeta = prog.add_var("zeta") if self.mode == "fp_maxmin" else None

        self._add_power_blocks()
        self._add_rate_blocks()
        self._add_sinr_blocks(point)
        self._add_log_blocks(point)
        self._add_bound_rows()
        if has_ee:
            self._add_ee_rows(point)
        self._set_objective_blocks()
        return prog

    # ---------------------------------------------------------------- #
    def _v_rows(self, b, u=None, m=None):
        """Flat list of real/imag variable rows for a beamformer slice."""
        vr, vi = self.vr, self.vi
        if u is None and m is None:
            idx = np.concatenate([vr[b].ravel(), vi[b].ravel()])
        elif u is None:
            idx = np.concatenate([vr[b, :, m], vi[b, :, m]])
        else:
            idx = np.concatenate([vr[b, u], vi[b, u]])
        return [cb.vx(i) for i in idx]

    def _add_power_blocks(self):
        data = self.data
        B, M = data.B, data.M
        bud = data.budget
        rows = []
        net_pa = []
        for b in range(B):
            if data.nonlinear_pa:
                for m in range(M):
                    cb.add_soc(self.prog, cb.vx(self.u_ant[b, m]),
                               self._v_rows(b, m=m))
                    rows.append(cb.exadd(cb.ex(const=np.sqrt(bud.per_antenna_w)),
                                         cb.vx(self.u_ant[b, m], -1.0)))
                cb.add_soc(self.prog, cb.ex(const=np.sqrt(bud.per_bs_w)),
                           self._v_rows(b))
                pa_terms = [cb.vx(self.u_ant[b, m], -data.inv_eff)
                            for m in range(M)]
            else:
                cb.add_rsoc(self.prog, cb.vx(self.w_pa[b]), cb.ex(const=0.5),
                            self._v_rows(b))
                rows.append(cb.exadd(cb.ex(const=bud.per_bs_w),
                                     cb.vx(self.w_pa[b], -1.0)))
                for m in range(M):
                    cb.add_soc(self.prog,
                               cb.ex(const=np.sqrt(bud.per_antenna_w)),
                               self._v_rows(b, m=m))
                pa_terms = [cb.vx(self.w_pa[b], -data.inv_eff)]
            if self.cellwise:
                rows.append(cb.exadd(cb.vx(self.t[b]),
                                     cb.ex(const=-data.c_cell), *pa_terms))
            else:
                net_pa.extend(pa_terms)
        if not self.cellwise:
            rows.append(cb.exadd(cb.vx(self.t[0]),
                                 cb.ex(const=-data.c_cell * B), *net_pa))
        cb.add_nonneg(self.prog, rows)

    def _add_rate_blocks(self):
        if self.z is None:
            return
        B, U = self.data.B, self.data.U
        if self.cellwise:
            for b in range(B):
                total = cb.exadd(*[cb.vx(self.beta[b, u]) for u in range(U)])
                cb.add_rsoc(self.prog, total, cb.ex(const=0.5),
                            [cb.vx(self.z[b])])
        else:
            total = cb.exadd(*[cb.vx(i) for i in self.beta.ravel()])
            cb.add_rsoc(self.prog, total, cb.ex(const=0.5), [cb.vx(self.z[0])])
        if self.s_rd is not None:
            # s >= t + c_rd z^2 as a rotated cone per cell.
            for b in range(len(self.s_rd)):
                cb.add_rsoc(self.prog,
                            cb.exadd(cb.vx(self.s_rd[b]), cb.vx(self.t[b], -1.0)),
                            cb.ex(const=0.5),
                            [cb.vx(self.z[b], np.sqrt(self.data.c_rd))])

    def _sinr_rows(self, b, u, point):
        """Dynamic head/tail rows of the SINR surrogate SOC block."""
        data = self.data
        a = data.hn[b, b, u]
        s_n = a @ point.v[b, u]
        g_n = point.g[b, u]
        cvec = 2.0 * np.conj(s_n) * a / g_n
        coeffs = {}
        for m in range(data.M):
            coeffs[int(self.vr[b, u, m])] = cvec[m].real
            coeffs[int(self.vi[b, u, m])] = -cvec[m].imag
        coeffs[int(self.g[b, u])] = -abs(s_n) ** 2 / g_n**2
        lin = (coeffs, 0.0)
        # ||amps||^2 + 1 <= lin  ->  SOC rows [lin, 2*amps..., lin - 2]
        return lin, cb.exadd(lin, cb.ex(const=-2.0))

    def _add_sinr_blocks(self, point):
        data = self.data
        B, U, M = data.B, data.U, data.M
        self.sinr_bids = {}
        for b in range(B):
            for u in range(U):
                head, last = self._sinr_rows(b, u, point)
                tails = []
                for k in range(B):
                    for i in range(U):
                        if k == b and i == u:
                            continue
                        akm = data.hn[k, b, u]
                        re_row, im_row = {}, {}
                        for m in range(M):
                            re_row[int(self.vr[k, i, m])] = 2.0 * akm[m].real
                            re_row[int(self.vi[k, i, m])] = -2.0 * akm[m].imag
                            im_row[int(self.vr[k, i, m])] = 2.0 * akm[m].imag
                            im_row[int(self.vi[k, i, m])] = 2.0 * akm[m].real
                        tails.append((re_row, 0.0))
                        tails.append((im_row, 0.0))
                tails.append(last)
                self.sinr_bids[b, u] = cb.add_soc(self.prog, head, tails)

    def _add_log_blocks(self, point):
        self.log_bids = {}
        for b in range(self.data.B):
            for u in range(self.data.U):
                self.log_bids[b, u] = cb.add_log_lb(
                    self.prog, self.cfg.log_bound,
                    cb.vx(self.g[b, u]), cb.vx(self.beta[b, u]),
                    point.g[b, u], self.cfg.lipschitz_c)

    def _add_bound_rows(self):
        rows = [cb.vx(i) for i in self.g.ravel()]
        if self.z is not None:
            rows += [cb.exadd(cb.vx(i), cb.ex(const=-self.cfg.z_min))
                     for i in self.z]
        if self.mode in OBJECTIVES:
            rows += [cb.vx(i) for i in self.eta]
        cb.add_nonneg(self.prog, rows)

    def _ee_row(self, b, point):
        z_n = point.z[b]
        den_n = point.s_rd[b] if self.s_rd is not None else point.t[b]
        den_var = self.s_rd[b] if self.s_rd is not None else self.t[b]
        eta_var = self.eta[b] if len(self.eta) > 1 else self.eta[0]
        return ({int(self.z[b]): 2.0 * z_n / den_n,
                 int(den_var): -((z_n / den_n) ** 2),
                 int(eta_var): -1.0}, 0.0)

    def _add_ee_rows(self, point):
        rows = [self._ee_row(b, point) for b in range(len(self.z))]
        self.ee_bid = cb.add_nonneg(self.prog, rows)

    def _set_objective_blocks(self):
        if self.mode == "nee" or self.mode == "maxmin":
            self.prog.set_objective({int(self.eta[0]): 1.0})
        elif self.mode == "swee":
            self.prog.set_objective({int(e): w for e, w
                                     in zip(self.eta, self.data.weights)})
        elif self.mode == "wpee":
            s = cb.add_geomean(self.prog, [int(e) for e in self.eta],
                               self.data.weights)
            self.prog.set_objective({s: 1.0})
        elif self.mode == "fp_nee":
            self.set_fp_params(0.0)
        elif self.mode == "fp_swee":
            self.set_fp_params(np.ones(self.data.B), np.zeros(self.data.B))
        elif self.mode == "fp_maxmin":
            rows = [self._fp_maxmin_row(b, 0.0) for b in range(self.data.B)]
            self.fp_bid = cb.add_nonneg(self.prog, rows)
            self.prog.set_objective({int(self.zeta): 1.0})

    # ---------------------------------------------------------------- #
    def set_expansion(self, point: EpigraphPoint):
        for (b, u), bid in self.sinr_bids.items():
            head, last = self._sinr_rows(b, u, point)
            dim = self.prog.blocks[bid].dim
            self.prog.set_row(bid, 0, *head)
            self.prog.set_row(bid, dim - 1, *last)
        for (b, u), bid in self.log_bids.items():
            cb.update_log_lb(self.prog, bid, self.cfg.log_bound,
                             cb.vx(self.g[b, u]), cb.vx(self.beta[b, u]),
                             point.g[b, u], self.cfg.lipschitz_c)
        if self.mode in OBJECTIVES:
            for b in range(len(self.z)):
                self.prog.set_row(self.ee_bid, b, *self._ee_row(b, point))

    def _fp_maxmin_row(self, b, lam):
        terms = [cb.vx(self.beta[b, u]) for u in range(self.data.U)]
        return cb.exadd(*terms, cb.vx(self.t[b], -lam),
                        cb.vx(self.zeta, -1.0))

    def set_fp_params(self, *params):
        """Parametric objective of the FP inner problems.

        fp_nee: set_fp_params(lam); fp_swee: (alpha_b, lam_b);
        fp_maxmin: (lam,) rewriting the per-cell rows."""
        if self.mode == "fp_nee":
            lam, = params
            obj = {int(i): 1.0 for i in self.beta.ravel()}
            obj[int(self.t[0])] = -float(lam)
            self.prog.set_objective(obj)
        elif self.mode == "fp_swee":
            alpha, lam = params
            obj = {}
            for b in range(self.data.B):
                for u in range(self.data.U):
                    obj[int(self.beta[b, u])] = alpha[b] * self.data.weights[b]
                obj[int(self.t[b])] = -alpha[b] * lam[b]
            self.prog.set_objective(obj)
        elif self.mode == "fp_maxmin":
            lam, = params
            for b in range(self.data.B):
                self.prog.set_row(self.fp_bid, b, *self._fp_maxmin_row(b, lam))
        else:
            raise ValueError("not an FP mode")

    # ---------------------------------------------------------------- #
    def extract(self, sol) -> EpigraphPoint:
        x = sol.x
        data = self.data
        v = x[self.vr.ravel()].reshape(data.B, data.U, data.M) \
            + 1j * x[self.vi.ravel()].reshape(data.B, data.U, data.M)
        g = np.maximum(x[self.g.ravel()].reshape(data.B, data.U), 1e-12)
        beta = x[self.beta.ravel()].reshape(data.B, data.U)
        if self.mode in FP_MODES:
            t = np.maximum(x[self.t], 1e-12)
            if self.cellwise:
                zv = np.sqrt(np.maximum(beta.sum(axis=1), 0.0))
            else:
                zv = np.array([np.sqrt(max(beta.sum(), 0.0))])
            return EpigraphPoint(v=v, g=g, z=zv, t=t, eta=np.zeros(1), beta=beta)
        z = np.maximum(x[self.z], self.cfg.z_min)
        t = np.maximum(x[self.t], 1e-12)
        eta = x[self.eta]
        u_ant = x[self.u_ant.ravel()].reshape(data.B, data.M) \
            if data.nonlinear_pa else None
        s_rd = np.maximum(x[self.s_rd], 1e-12) if self.s_rd is not None else None
        return EpigraphPoint(v=v, g=g, z=z, t=t, eta=eta, beta=beta,
                             u_ant=u_ant, s_rd=s_rd)


def build_subproblem(ch, budget, cfg: SCAConfig, point: EpigraphPoint):
    """One-shot convex subproblem at the given expansion point."""
    builder = SubproblemBuilder(ProblemData(ch, budget, cfg))
    prog = builder.build(point)
    return prog, builder


# --------------------------------------------------------------------- #
def epigraph_violation(data: ProblemData, pt: EpigraphPoint):
    """Max normalized violation of the original nonconvex constraints."""
    bud = data.budget
    viol = 0.0
    for b in range(data.B):
        tot = np.sum(np.abs(pt.v[b]) ** 2)
        viol = max(viol, (tot - bud.per_bs_w) / bud.per_bs_w)
        per_ant = np.sum(np.abs(pt.v[b]) ** 2, axis=0)
        viol = max(viol, float(per_ant.max() - bud.per_antenna_w)
                   / bud.per_antenna_w)
    gam = data.sinr(pt.v)
    viol = max(viol, float(np.max((pt.g - gam) / (1.0 + gam))))
    r = np.log1p(pt.g)
    cell_r = r.sum(axis=1) if len(pt.z) > 1 else np.array([r.sum()])
    viol = max(viol, float(np.max((pt.z**2 - cell_r) / np.maximum(cell_r, 1e-9))))
    p_hw = data.cell_power_hw(pt.v)
    p_cell = p_hw if len(pt.t) > 1 else np.array([p_hw.sum()])
    viol = max(viol, float(np.max((p_cell - pt.t) / p_cell)))
    denom = pt.t if pt.s_rd is None else pt.s_rd
    if pt.s_rd is not None:
        need = pt.t + data.c_rd * pt.z**2
        viol = max(viol, float(np.max((need - pt.s_rd) / need)))
    ee = pt.z**2 / denom
    if len(pt.eta) == len(ee):
        viol = max(viol, float(np.max((pt.eta - ee) / np.maximum(ee, 1e-12))))
    else:  # maxmin: scalar eta against the worst cell
        viol = max(viol, float((pt.eta[0] - ee.min()) / max(ee.min(), 1e-12)))
    return max(viol, 0.0)


def epigraph_activeness(data: ProblemData, pt: EpigraphPoint):
    """Relative slack of the epigraph constraints at a converged point.

    For maxmin only the bottleneck cell is measured (the other cells'
    slacks are indeterminate at the optimum)."""
    gam = data.sinr(pt.v)
    r = np.log1p(pt.g)
    maxmin = data.cfg.objective == "maxmin" and len(pt.z) > 1
    if len(pt.z) > 1:
        cell_r = r.sum(axis=1)
        p_cell = data.cell_power_hw(pt.v)
    else:
        cell_r = np.array([r.sum()])
        p_cell = np.array([data.cell_power_hw(pt.v).sum()])
    denom = pt.t if pt.s_rd is None else pt.s_rd
    ee = pt.z**2 / denom
    cells = [int(np.argmin(ee))] if maxmin else list(range(len(pt.z)))
    eta = pt.eta if len(pt.eta) == len(ee) else np.repeat(pt.eta, len(ee))

    gap_sinr = np.abs(pt.g - gam) / np.maximum(gam, 1e-12)
    if maxmin:
        gap_sinr = gap_sinr[cells]
    return {
        "ee": float(np.max(np.abs(eta[cells] - ee[cells]) / ee[cells])),
        "rate": float(np.max(np.abs(pt.z[cells] ** 2 - cell_r[cells])
                             / cell_r[cells])),
        "power": float(np.max(np.abs(pt.t[cells] - p_cell[cells])
                              / p_cell[cells])),
        "sinr": float(np.max(gap_sinr)),
    }


# --------------------------------------------------------------------- #
def run(ch, budget, cfg: SCAConfig, seed=0):
    """Algorithm: iterate convexify -> solve -> re-expand until the true
    objective stalls.  Returns (BeamformerSet, SCATrace)."""
    from .metrics import BeamformerSet

    if cfg.multi_start > 1:
        best = None
        for k in range(cfg.multi_start):
            v, tr = run(ch, budget, replace(cfg, multi_start=1),
                        seed=(seed, k) if isinstance(seed, (int, np.integer))
                        else tuple(seed) + (k,))
            if best is None or (tr.objective and tr.objective[-1] >
                                best[1].objective[-1]):
                best = (v, tr)
        return best

    t0 = time.perf_counter()
    data = ProblemData(ch, budget, cfg)
    rng = np.random.default_rng(np.random.SeedSequence(seed_entropy(seed)))
    point = init_feasible(ch, budget, cfg, rng)
    builder = SubproblemBuilder(data)
    builder.build(point)
    solver = CachedSolver(builder.prog)
    trace = SCATrace()

    prev = None
    retried = False
    for it in range(cfg.max_iter):
        builder.set_expansion(point)
        sol = solver.solve(tol=cfg.solver_tol)
        trace.conic_solves += 1
        usable = sol.status == OPTIMAL or (
            max(sol.pres, sol.dres, sol.relgap) <= 1e-5)
        if not usable:
            if not retried:
                retried = True
                point = tighten_point(data, point.v * 0.95)
                trace.solver_status.append(sol.status)
                trace.solver_iters.append(sol.iterations)
                trace.objective.append(trace.objective[-1] if trace.objective
                                       else data.objective_bits(point.v))
                trace.objective_internal.append(
                    trace.objective_internal[-1] if trace.objective_internal
                    else data.internal_objective(point.v))
                trace.surrogate.append(np.nan)
                trace.max_violation.append(epigraph_violation(data, point))
                continue
            trace.status = f"solver_{sol.status}"
            break
        retried = False
        point = builder.extract(sol)
        obj_int = data.internal_objective(point.v)
        trace.objective.append(obj_int * data.bits_scale)
        trace.objective_internal.append(obj_int)
        trace.surrogate.append(sol.obj)
        trace.max_violation.append(epigraph_violation(data, point))
        trace.solver_status.append(sol.status)
        trace.solver_iters.append(sol.iterations)
        if prev is not None and obj_int - prev <= cfg.obj_tol * max(1.0, abs(obj_int)):
            trace.converged = True
            break
        prev = obj_int

    trace.wall_time = time.perf_counter() - t0
    trace.activeness = epigraph_activeness(data, point)
    return BeamformerSet(v=point.v), trace


def seed_entropy(seed):
    """SeedSequence entropy from an int or a tuple of ints."""
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    return [int(s) for s in seed]
