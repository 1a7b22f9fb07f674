"""Flat layout of the cone slack vector: l nonnegative entries first, then
second-order-cone blocks back to back.  Precomputes the index arrays the
kernel backends need for segmented operations."""

import numpy as np


class Layout:
    def __init__(self, l, dims):
        self.l = int(l)
        self.dims = np.asarray(dims, dtype=np.int32)
        self.nsoc = len(self.dims)
        self.msoc = int(self.dims.sum())
        self.m = self.l + self.msoc
        # Absolute start of each SOC block in the full vector.
        self.starts = (self.l + np.concatenate([[0], np.cumsum(self.dims[:-1])])
                       ).astype(np.int32) if self.nsoc else np.zeros(0, np.int32)
        # Relative (to the SOC slice) segment starts for reduceat.
        self.rel = (self.starts - self.l).astype(np.intp)
        self.rep = np.repeat(np.arange(self.nsoc), self.dims)
        head = np.zeros(self.msoc, dtype=bool)
        head[self.rel] = True
        self.head_mask = head
        self.tail_mask = ~head
        # Barrier degree: each nonneg entry and each SOC block counts one.
        self.degree = self.l + self.nsoc

        e = np.zeros(self.m)
        e[:self.l] = 1.0
        if self.nsoc:
            e[self.starts] = 1.0
        self.e = e

    def identity(self):
        return self.e.copy()

    def blocksum(self, x):
        """Per-SOC-block sums of an msoc-length array."""
        if self.msoc == 0:
            return np.zeros(0)
        return np.add.reduceat(x, self.rel)
