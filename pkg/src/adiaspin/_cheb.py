"""Adaptive piecewise-Chebyshev indefinite integrals of vectorized integrands."""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import QuadratureError

_N = 24
_NODES = np.cos(np.pi * (np.arange(_N) + 0.5) / _N)[::-1]  # first-kind points, ascending
_MAX_PANELS = 200_000


class CumulativeIntegral:
    """``F(t) = int_{t0}^{t} f`` on ``[t0, t1]``, evaluable anywhere in that range.

    Panels are bisected until the trailing Chebyshev coefficients of ``f``
    bound each panel's contribution to the error by ``tol * width / length``.
    """

    def __init__(self, f, t0: float, t1: float, tol: float, min_panels: int = 8):
        self.t0, self.t1 = float(t0), float(t1)
        length = self.t1 - self.t0
        if not length > 0:
            raise ValueError("CumulativeIntegral requires t1 > t0")
        todo = np.linspace(self.t0, self.t1, min_panels + 1)
        todo = np.column_stack([todo[:-1], todo[1:]])
        done_edges, done_coef = [], []
        while len(todo):
            a, b = todo[:, :1], todo[:, 1:]
            t = 0.5 * (a + b) + 0.5 * (b - a) * _NODES
            vals = np.asarray(f(t.ravel()), dtype=float).reshape(t.shape)
            coef = C.chebfit(_NODES, vals.T, _N - 1).T  # (panels, N)
            half = 0.5 * (b - a)[:, 0]
            tail = np.max(np.abs(coef[:, -4:]), axis=1) * 2 * half
            ok = tail <= tol * 2 * half / length
            ok |= half * 2 <= 1e-13 * length
            if np.any(~np.isfinite(coef)):
                raise QuadratureError("integrand is not finite", t0=self.t0, t1=self.t1)
            done_edges.append(todo[ok])
            done_coef.append(coef[ok])
            split = todo[~ok]
            mid = 0.5 * (split[:, 0] + split[:, 1])
            todo = np.concatenate([np.column_stack([split[:, 0], mid]), np.column_stack([mid, split[:, 1]])])
            if sum(len(e) for e in done_edges) + len(todo) > _MAX_PANELS:
                raise QuadratureError("piecewise integral needs too many panels", t0=self.t0, t1=self.t1, tol=tol)
        edges = np.concatenate(done_edges)
        coef = np.concatenate(done_coef)
        order = np.argsort(edges[:, 0])
        self.edges, coef = edges[order], coef[order]
        half = 0.5 * (self.edges[:, 1] - self.edges[:, 0])
        # indefinite integral per panel, zero at the panel's left end
        self._icoef = np.array([C.chebint(c, lbnd=-1) for c in coef]) * half[:, None]
        totals = C.chebval(1.0, self._icoef.T)
        self._offset = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
        self.panels = len(self.edges)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0) or np.any(t > self.t1):
            raise ValueError("evaluation outside the integration range")
        flat = np.atleast_1d(t).ravel()
        k = np.clip(np.searchsorted(self.edges[:, 0], flat, side="right") - 1, 0, self.panels - 1)
        a, b = self.edges[k, 0], self.edges[k, 1]
        x = (2 * flat - a - b) / (b - a)
        out = self._offset[k] + np.einsum("ij,ji->i", self._icoef[k], C.chebvander(x, _N).T)
        return out.reshape(t.shape) if t.ndim else float(out[0])
