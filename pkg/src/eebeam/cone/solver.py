"""Dense primal-dual path-following solver for the ConeProgram IR.

The program (maximize obj'x s.t. affine maps into cones) is flattened to

    minimize c'x   s.t.   A x = b,   G x + s = h,   s in K

with K = R+^l x SOC(d_1) x ... (rotated cones are mapped onto plain SOC by
the isometry (p,q,w) -> ((p+q)/sqrt2, (p-q)/sqrt2, w)), and solved via the
homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector.  Infeasible and unbounded programs are certified by
the embedding's dual/primal rays.

CachedSolver keeps the flattened matrices and per-block Gram caches alive
across `solve()` calls; rewriting a few rows of the program between solves
(the SCA iteration pattern) only costs a couple of rank-one Gram updates.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels as K
from .program import NONNEG, RSOC, SOC, ZERO

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITER = "max_iter"
NUMERICAL = "numerical"

_SQRT2 = np.sqrt(2.0)
_STEP = 0.99


@dataclass
class ConeSolution:
    status: str
    x: np.ndarray
    obj: float                      # value of the maximized objective
    iterations: int
    pres: float = np.inf
    dres: float = np.inf
    relgap: float = np.inf
    tau: float = 0.0
    kappa: float = 0.0
    y: np.ndarray = None            # multipliers of the Zero rows
    z: np.ndarray = None            # cone duals, flat layout
    s: np.ndarray = None            # cone slacks, flat layout
    solve_time: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == OPTIMAL


class CachedSolver:
    def __init__(self, prog):
        self.prog = prog
        self._flatten()

    # ------------------------------------------------------------------ #
    def _flatten(self):
        prog = self.prog
        n = self.n = prog.n
        zero_rows, nn_rows, soc_blocks = [], [], []
        self._map = []  # per program block: (kind, location info)
        for bid, blk in enumerate(prog.blocks):
            if blk.kind == ZERO:
                self._map.append((ZERO, len(zero_rows)))
                zero_rows.extend(blk.rows)
            elif blk.kind == NONNEG:
                self._map.append((NONNEG, len(nn_rows)))
                nn_rows.extend(blk.rows)
            else:
                self._map.append((blk.kind, len(soc_blocks)))
                soc_blocks.append(bid)

        self.p = len(zero_rows)
        self.l = len(nn_rows)
        self.soc_bids = soc_blocks
        dims = [prog.blocks[b].dim for b in soc_blocks]
        self.lay = K.Layout(self.l, dims)
        m, p = self.lay.m, self.p

        self.A = np.zeros((p, n))
        self.b = np.zeros(p)
        self.G = np.zeros((m, n))
        self.h = np.zeros(m)
        self.row_scale = np.ones(m)
        self._zero_scale = np.ones(p)
        self.col_scale = np.ones(n)
        self._versions = [list(b.versions) for b in prog.blocks]

        # Rotated cones become SOC rows here; remember which blocks need the map.
        self._rsoc = set()
        for r, (idx, val, g) in enumerate(zero_rows):
            self.A[r, idx] = -val
            self.b[r] = g
        for r, (idx, val, g) in enumerate(nn_rows):
            self.G[r, idx] = -val
            self.h[r] = g
        for k, bid in enumerate(soc_blocks):
            blk = prog.blocks[bid]
            if blk.kind == RSOC:
                self._rsoc.add(bid)
            start, dim = self.lay.starts[k], int(self.lay.dims[k])
            for rr in range(dim):
                idx, val, g = self._soc_row(blk, rr)
                self.G[start + rr, idx] = -val
                self.h[start + rr] = g

        self._equilibrate()
        self._grams = []
        for k in range(self.lay.nsoc):
            start, dim = self.lay.starts[k], int(self.lay.dims[k])
            F = self.G[start:start + dim]
            self._grams.append(F.T @ F)

        # c for the internal minimization is the negated maximize objective.
        self.c = -prog.objective_vector() * self.col_scale
        self._obj_version = prog.obj_version

    def _equilibrate(self, passes=3):
        """Ruiz equilibration; SOC blocks get one uniform row factor so the
        cone geometry is preserved.  col_scale maps solver variables back to
        program variables (x = col_scale * x_solver)."""
        lay = self.lay

        def factors(maxes):
            d = np.sqrt(np.clip(maxes, 1e-8, 1e8))
            d[maxes == 0.0] = 1.0  # constant rows / unused columns stay put
            return d

        for _ in range(passes):
            rmax = np.abs(self.G).max(axis=1) if self.n else np.zeros(lay.m)
            row_d = factors(rmax)
            for k in range(lay.nsoc):
                start, dim = lay.starts[k], int(lay.dims[k])
                row_d[start:start + dim] = row_d[start:start + dim].max()
            self.G /= row_d[:, None]
            self.h /= row_d
            self.row_scale /= row_d
            if self.p:
                zr = factors(np.abs(self.A).max(axis=1))
                self.A /= zr[:, None]
                self.b /= zr
                self._zero_scale /= zr
            cmax = np.abs(self.G).max(axis=0)
            if self.p:
                cmax = np.maximum(cmax, np.abs(self.A).max(axis=0))
            col_d = factors(cmax)
            self.G /= col_d[None, :]
            if self.p:
                self.A /= col_d[None, :]
            self.col_scale /= col_d

    def _soc_row(self, blk, rr):
        """Row rr of a block in plain-SOC coordinates."""
        if blk.kind == SOC or rr >= 2:
            return blk.rows[rr]
        (i0, v0, g0), (i1, v1, g1) = blk.rows[0], blk.rows[1]
        sgn = 1.0 if rr == 0 else -1.0
        coeffs = {}
        for i, v in zip(i0, v0):
            coeffs[int(i)] = coeffs.get(int(i), 0.0) + v / _SQRT2
        for i, v in zip(i1, v1):
            coeffs[int(i)] = coeffs.get(int(i), 0.0) + sgn * v / _SQRT2
        items = sorted(coeffs.items())
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items])
        return idx, val, (g0 + sgn * g1) / _SQRT2

    def _write_cone_row(self, r, idx, val, g):
        sc = self.row_scale[r]
        self.G[r, :] = 0.0
        self.G[r, idx] = -val * sc * self.col_scale[idx]
        self.h[r] = g * sc

    def _sync(self):
        """Pull row edits from the program into G/h and the Gram caches."""
        prog = self.prog
        if prog.obj_version != self._obj_version:
            self.c = -prog.objective_vector() * self.col_scale
            self._obj_version = prog.obj_version
        for bid, blk in enumerate(prog.blocks):
            cached = self._versions[bid]
            if blk.versions == cached:
                continue
            kind, loc = self._map[bid]
            if kind == ZERO:
                for rr, (idx, val, g) in enumerate(blk.rows):
                    if blk.versions[rr] != cached[rr]:
                        r = loc + rr
                        sc = self._zero_scale[r]
                        self.A[r, :] = 0.0
                        self.A[r, idx] = -val * sc * self.col_scale[idx]
                        self.b[r] = g * sc
            elif kind == NONNEG:
                for rr, (idx, val, g) in enumerate(blk.rows):
                    if blk.versions[rr] != cached[rr]:
                        self._write_cone_row(loc + rr, idx, val, g)
            else:
                k = loc
                start = self.lay.starts[k]
                dirty = {rr for rr in range(blk.dim) if blk.versions[rr] != cached[rr]}
                if bid in self._rsoc and dirty & {0, 1}:
                    dirty |= {0, 1}
                gram = self._grams[k]
                for rr in sorted(dirty):
                    r = start + rr
                    old = self.G[r].copy()
                    idx, val, g = self._soc_row(blk, rr)
                    self._write_cone_row(r, idx, val, g)
                    new = self.G[r]
                    gram += np.outer(new, new) - np.outer(old, old)
            self._versions[bid] = list(blk.versions)

    # ------------------------------------------------------------------ #
    def _kkt_factor(self, S):
        """Assemble and factor the reduced KKT matrix for the current scaling."""
        w_nn, eta, wbar = S
        n, lay = self.n, self.lay
        H = np.zeros((n, n))
        if lay.l:
            Gl = self.G[:lay.l]
            H += (Gl / (w_nn * w_nn)[:, None]).T @ Gl
        if lay.nsoc:
            inv2 = 1.0 / (eta * eta)
            P = np.empty((n, lay.nsoc))
            Q = np.empty((n, lay.nsoc))
            for k in range(lay.nsoc):
                start, dim = lay.starts[k], int(lay.dims[k])
                H += inv2[k] * self._grams[k]
                wb = wbar[start - lay.l:start - lay.l + dim].copy()
                wb[1:] *= -1.0  # J wbar
                F = self.G[start:start + dim]
                P[:, k] = _SQRT2 * np.sqrt(inv2[k]) * (F.T @ wb)
                Q[:, k] = _SQRT2 * np.sqrt(inv2[k]) * F[0]
            H += P @ P.T - Q @ Q.T
        delta = 1e-12 * max(1.0, float(np.trace(H)) / max(n, 1))
        if self.p == 0:
            for _ in range(4):
                try:
                    cf = sla.cho_factor(H + delta * np.eye(n), lower=True,
                                        check_finite=False)
                    return ("chol", cf)
                except sla.LinAlgError:
                    delta *= 1e3
            raise K.ScalingError("KKT factorization failed")
        M = np.zeros((n + self.p, n + self.p))
        M[:n, :n] = H + delta * np.eye(n)
        M[:n, n:] = self.A.T
        M[n:, :n] = self.A
        M[n:, n:] = -delta * np.eye(self.p)
        lu = sla.lu_factor(M, check_finite=False)
        return ("lu", lu)

    def _kkt_solve(self, fact, rhs_x, rhs_y):
        kind, data = fact
        if kind == "chol":
            return sla.cho_solve(data, rhs_x, check_finite=False), np.zeros(0)
        sol = sla.lu_solve(data, np.concatenate([rhs_x, rhs_y]), check_finite=False)
        return sol[:self.n], sol[self.n:]

    def _solve3(self, fact, S, rx, ry, rz):
        """Solve the reduced Newton system
            A'dy + G'dz = rx,   -A dx = ry,   -G dx + W^2 dz = rz."""
        u = K.apply_w2(*S, rz, self.lay, inv=True)
        rhs_x = rx - self.G.T @ u
        dx, dy = self._kkt_solve(fact, rhs_x, -ry)
        # Iterative refinement against the unregularized system.
        scale = 1.0 + np.linalg.norm(rhs_x)
        for _ in range(3):
            r1 = self._h_mul(S, dx) + (self.A.T @ dy if self.p else 0.0) - rhs_x
            r2 = (self.A @ dx + ry) if self.p else np.zeros(0)
            nref = np.sqrt(np.dot(r1, r1) + np.dot(r2, r2))
            if nref <= 1e-12 * scale:
                break
            cx, cy = self._kkt_solve(fact, -r1, -r2)
            dx, dy = dx + cx, dy + cy
        dz = K.apply_w2(*S, rz + self.G @ dx, self.lay, inv=True)
        return dx, dy, dz

    def _h_mul(self, S, x):
        return self.G.T @ K.apply_w2(*S, self.G @ x, self.lay, inv=True)

    # ------------------------------------------------------------------ #
    def solve(self, tol=1e-8, max_iter=200, feastol=None):
        t0 = time.perf_counter()
        self._sync()
        n, p, lay = self.n, self.p, self.lay
        c, b, h, A, G = self.c, self.b, self.h, self.A, self.G
        feastol = tol if feastol is None else feastol
        norm_b = max(1.0, np.linalg.norm(b))
        norm_h = max(1.0, np.linalg.norm(h))
        norm_c = max(1.0, np.linalg.norm(c))

        x = np.zeros(n)
        y = np.zeros(p)
        s = lay.identity()
        z = lay.identity()
        tau, kappa = 1.0, 1.0
        nu = lay.degree + 1

        best = None
        best_score = np.inf
        tiny_steps = 0
        stalled = 0
        status = None
        iters = 0

        for it in range(max_iter):
            iters = it
            # residuals of the embedding
            r_x = (A.T @ y if p else 0.0) + G.T @ z + c * tau
            r_y = b * tau - A @ x if p else np.zeros(0)
            r_z = s + G @ x - h * tau
            r_tau = kappa + c @ x + (b @ y if p else 0.0) + h @ z

            xh, sh, zh = x / tau, s / tau, z / tau
            pres_eq = np.linalg.norm(A @ xh - b) / norm_b if p else 0.0
            pres = max(pres_eq, np.linalg.norm(G @ xh + sh - h) / norm_h)
            dres = np.linalg.norm((A.T @ (y / tau) if p else 0.0) + G.T @ zh + c) / norm_c
            pobj = c @ xh
            dobj = -(b @ (y / tau) if p else 0.0) - h @ zh
            gap = sh @ zh
            relgap = gap / max(1.0, abs(pobj), abs(dobj))

            score = max(pres, dres, relgap)
            if score < 0.9 * best_score:
                stalled = 0
            else:
                stalled += 1
            if score < best_score:
                best_score = score
                best = (x.copy(), y.copy(), z.copy(), s.copy(), tau, pres, dres, relgap)

            if pres <= feastol and dres <= feastol and relgap <= tol:
                status = OPTIMAL
                best = (x.copy(), y.copy(), z.copy(), s.copy(), tau, pres, dres, relgap)
                break
            if stalled >= 6:
                break  # hit the linear-algebra noise floor; judge best iterate

            # certificates of primal/dual infeasibility
            bty_htz = (b @ y if p else 0.0) + h @ z
            if bty_htz < -1e-12:
                cert = np.linalg.norm((A.T @ y if p else 0.0) + G.T @ z) / (-bty_htz)
                if cert / norm_c <= feastol and kappa > 1e-8 * tau:
                    status = INFEASIBLE
                    self._cert = (y / (-bty_htz), z / (-bty_htz))
                    break
            ctx = c @ x
            if ctx < -1e-12:
                cert = max(np.linalg.norm(A @ x) if p else 0.0,
                           np.linalg.norm(G @ x + s))
                if cert / (-ctx) / max(norm_b, norm_h) <= feastol and kappa > 1e-8 * tau:
                    status = UNBOUNDED
                    self._cert = (x / (-ctx),)
                    break

            mu = (s @ z + tau * kappa) / nu
            try:
                w_nn, eta, wbar, lam = K.scaling(s, z, lay)
                S = (w_nn, eta, wbar)
                fact = self._kkt_factor(S)
                sol1 = self._solve3(fact, S, c, b, h)
            except (K.ScalingError, sla.LinAlgError):
                break
            cbh1 = c @ sol1[0] + (b @ sol1[1] if p else 0.0) + h @ sol1[2]
            denom = cbh1 + kappa / tau  # = ||W dz1||^2 + kappa/tau > 0
            if denom <= 0.0:
                break

            def newton(eta_r, ds, dkap):
                dsbar = K.jsolve(lam, ds, lay)
                rz_eff = eta_r * r_z + K.apply_w(*S, dsbar, lay)
                d2 = self._solve3(fact, S, -eta_r * r_x, -eta_r * r_y, rz_eff)
                cbh2 = c @ d2[0] + (b @ d2[1] if p else 0.0) + h @ d2[2]
                dtau = (dkap / tau + cbh2 + eta_r * r_tau) / denom
                dx = d2[0] - dtau * sol1[0]
                dy = d2[1] - dtau * sol1[1] if p else np.zeros(0)
                dz = d2[2] - dtau * sol1[2]
                dkappa = (dkap - kappa * dtau) / tau
                dss = K.apply_w(*S, dsbar - K.apply_w(*S, dz, lay), lay)
                return dx, dy, dz, dss, dtau, dkappa

            def max_alpha(dz_, ds_, dtau, dkappa):
                a = min(K.max_step(s, ds_, lay), K.max_step(z, dz_, lay))
                if dtau < 0.0:
                    a = min(a, -tau / dtau)
                if dkappa < 0.0:
                    a = min(a, -kappa / dkappa)
                return a

            # predictor
            ds_aff = -K.jmul(lam, lam, lay)
            aff = newton(1.0, ds_aff, -tau * kappa)
            a_aff = min(1.0, max_alpha(aff[2], aff[3], aff[4], aff[5]))
            sigma = (1.0 - a_aff) ** 3

            # corrector
            corr = K.jmul(K.apply_w(*S, aff[3], lay, inv=True),
                          K.apply_w(*S, aff[2], lay), lay)
            ds_c = sigma * mu * lay.e - K.jmul(lam, lam, lay) - corr
            dk_c = sigma * mu - tau * kappa - aff[4] * aff[5]
            step = newton(1.0 - sigma, ds_c, dk_c)
            a_raw = max_alpha(step[2], step[3], step[4], step[5])
            alpha = min(1.0, _STEP * a_raw)
            if alpha < 1e-10:
                # extra centering rescue
                ds_c = 0.8 * mu * lay.e - K.jmul(lam, lam, lay)
                step = newton(0.2, ds_c, 0.8 * mu - tau * kappa)
                alpha = min(1.0, _STEP * max_alpha(step[2], step[3], step[4], step[5]))
                if alpha < 1e-12:
                    break
                tiny_steps += 1
                if tiny_steps >= 4:
                    break
            else:
                tiny_steps = 0

            x = x + alpha * step[0]
            if p:
                y = y + alpha * step[1]
            z = z + alpha * step[2]
            s = s + alpha * step[3]
            tau += alpha * step[4]
            kappa += alpha * step[5]
        else:
            iters = max_iter

        if status is None:
            # Loop ended without a certificate: grade the best iterate.
            inaccurate = max(100.0 * tol, 1e-7)
            if best_score <= tol:
                status = OPTIMAL
            elif best_score <= inaccurate:
                status = OPTIMAL  # flagged below
            elif iters >= max_iter:
                status = MAX_ITER
            else:
                status = NUMERICAL
            sol = self._package(status, best, iters, time.perf_counter() - t0)
            if tol < best_score <= inaccurate:
                sol.info["inaccurate"] = True
            return sol
        return self._package(status, best, iters, time.perf_counter() - t0)

    # ------------------------------------------------------------------ #
    def _package(self, status, best, iters, dt):
        x, y, z, s, tau, pres, dres, relgap = best
        obj = -(self.c @ x) / tau
        sol = ConeSolution(
            status=status, x=(x / tau) * self.col_scale, obj=obj,
            iterations=iters + 1,
            pres=pres, dres=dres, relgap=relgap, tau=tau, kappa=0.0,
            y=(y / tau) * self._zero_scale, z=(z / tau) * self.row_scale,
            s=(s / tau) / self.row_scale, solve_time=dt,
        )
        if status in (INFEASIBLE, UNBOUNDED):
            sol.info["certificate"] = self._cert
        return sol


def solve(prog, tol=1e-8, max_iter=200) -> ConeSolution:
    """One-shot solve of a ConeProgram (builds a fresh CachedSolver)."""
    return CachedSolver(prog).solve(tol=tol, max_iter=max_iter)
