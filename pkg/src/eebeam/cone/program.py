"""Language-neutral conic-program IR.

A ConeProgram is a linear maximization over affine maps into cones:

    maximize  obj' x   subject to   F_j x + g_j  in  K_j

with K_j one of Zero (equality), Nonneg, SOC (||tail|| <= head) or
RotatedSOC (2 p q >= ||w||^2, p,q >= 0; rows ordered p, q, w...).

Rows are stored sparsely as (index, value, constant) triplets.  Rows can be
rewritten in place (`set_row`); per-row version counters let a solver keep
factorization caches across updates, which is what makes the SCA loop cheap
(only the expansion-point-dependent rows change between iterations).
"""

import numpy as np

ZERO = "zero"
NONNEG = "nonneg"
SOC = "soc"
RSOC = "rsoc"

_MIN_DIM = {ZERO: 1, NONNEG: 1, SOC: 2, RSOC: 3}


def _as_row(coeffs, const):
    if isinstance(coeffs, dict):
        items = sorted(coeffs.items())
    else:
        items = sorted(coeffs)
    idx = np.fromiter((i for i, _ in items), dtype=np.int64, count=len(items))
    val = np.fromiter((v for _, v in items), dtype=float, count=len(items))
    keep = val != 0.0
    if not np.all(keep):
        idx, val = idx[keep], val[keep]
    return idx, val, float(const)


class Block:
    __slots__ = ("kind", "rows", "versions")

    def __init__(self, kind, rows):
        self.kind = kind
        self.rows = rows
        self.versions = [0] * len(rows)

    @property
    def dim(self):
        return len(self.rows)


class ConeProgram:
    def __init__(self):
        self.names = []
        self.objective = {}
        self.obj_version = 0
        self.blocks = []

    # -- variables ---------------------------------------------------------
    @property
    def n(self):
        return len(self.names)

    def add_var(self, name="x"):
        self.names.append(name)
        return len(self.names) - 1

    def add_vars(self, prefix, count):
        base = len(self.names)
        self.names.extend(f"{prefix}[{i}]" for i in range(count))
        return np.arange(base, base + count)

    def set_objective(self, coeffs):
        """Linear objective to maximize, as {var index: coefficient}."""
        self.objective = {int(i): float(v) for i, v in coeffs.items() if v != 0.0}
        self.obj_version += 1

    # -- constraints -------------------------------------------------------
    def add_block(self, kind, rows):
        """rows: list of (coeffs, const); returns the block id."""
        if kind not in _MIN_DIM:
            raise ValueError(f"unknown cone kind {kind!r}")
        if len(rows) < _MIN_DIM[kind]:
            raise ValueError(f"{kind} block needs >= {_MIN_DIM[kind]} rows")
        self.blocks.append(Block(kind, [_as_row(c, g) for c, g in rows]))
        return len(self.blocks) - 1

    def set_row(self, bid, rid, coeffs, const):
        blk = self.blocks[bid]
        blk.rows[rid] = _as_row(coeffs, const)
        blk.versions[rid] += 1

    @property
    def num_rows(self):
        return sum(b.dim for b in self.blocks)

    def objective_vector(self):
        c = np.zeros(self.n)
        for i, v in self.objective.items():
            c[i] = v
        return c

    # -- evaluation --------------------------------------------------------
    def block_values(self, x, bid):
        blk = self.blocks[bid]
        out = np.empty(blk.dim)
        for r, (idx, val, g) in enumerate(blk.rows):
            out[r] = val @ x[idx] + g
        return out

    def violation(self, x, bid):
        """How far block bid is from cone membership at x (0 if inside)."""
        v = self.block_values(x, bid)
        kind = self.blocks[bid].kind
        if kind == ZERO:
            return float(np.max(np.abs(v)))
        if kind == NONNEG:
            return float(max(0.0, -np.min(v)))
        if kind == RSOC:
            # Map to the equivalent plain SOC to keep units linear.
            v = np.concatenate([[(v[0] + v[1]) / np.sqrt(2.0),
                                 (v[0] - v[1]) / np.sqrt(2.0)], v[2:]])
        return float(max(0.0, np.linalg.norm(v[1:]) - v[0]))

    def max_violation(self, x):
        return max((self.violation(x, b) for b in range(len(self.blocks))),
                   default=0.0)

    def feasible(self, x, tol=1e-8):
        return self.max_violation(x) <= tol

    # -- debug dump --------------------------------------------------------
    def dumps(self):
        """Plain-text form for cross-validation against other solvers."""
        lines = ["objective " + " ".join(
            f"{i}:{v!r}" for i, v in sorted(self.objective.items()))]
        for blk in self.blocks:
            rows = []
            for idx, val, g in blk.rows:
                rows.append(f"{g!r} " + " ".join(
                    f"{int(i)}:{v!r}" for i, v in zip(idx, val)))
            lines.append(f"{blk.kind} {blk.dim} | " + " ; ".join(rows))
        return "\n".join(lines) + "\n"

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())
