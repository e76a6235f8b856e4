"""Sparse complex polynomials in the four embedding coordinates.

The eigenbasis functions are restrictions of degree-n polynomials in
q = (q0, q1, q2, q3) to the unit sphere, so every differential operator
of the quantum module maps polynomials to polynomials and can be
applied without truncation error.  Terms are a dict from exponent
4-tuples to complex coefficients.
"""

from __future__ import annotations

import numpy as np

_DROP = 0.0  # coefficients exactly equal to zero are dropped


class QPoly:
    """Immutable-by-convention sparse polynomial in (q0, q1, q2, q3)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        if terms:
            for expo, coef in terms.items():
                c = complex(coef)
                if c != _DROP:
                    self.terms[tuple(int(e) for e in expo)] = c

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c) -> "QPoly":
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def variable(cls, axis: int) -> "QPoly":
        expo = [0, 0, 0, 0]
        expo[axis] = 1
        return cls({tuple(expo): 1.0})

    @classmethod
    def from_coeffs_1d(cls, axis: int, coeffs) -> "QPoly":
        """Polynomial sum_k coeffs[k] * q_axis^k."""
        terms = {}
        for k, c in enumerate(coeffs):
            if c != 0:
                expo = [0, 0, 0, 0]
                expo[axis] = k
                terms[tuple(expo)] = c
        return cls(terms)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "QPoly") -> "QPoly":
        out = dict(self.terms)
        for expo, c in other.terms.items():
            out[expo] = out.get(expo, 0.0) + c
        return QPoly(out)

    def __sub__(self, other: "QPoly") -> "QPoly":
        out = dict(self.terms)
        for expo, c in other.terms.items():
            out[expo] = out.get(expo, 0.0) - c
        return QPoly(out)

    def __neg__(self) -> "QPoly":
        return QPoly({e: -c for e, c in self.terms.items()})

    def scale(self, s) -> "QPoly":
        return QPoly({e: s * c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, QPoly):
            out: dict = {}
            for ea, ca in self.terms.items():
                for eb, cb in other.terms.items():
                    expo = (ea[0] + eb[0], ea[1] + eb[1],
                            ea[2] + eb[2], ea[3] + eb[3])
                    out[expo] = out.get(expo, 0.0) + ca * cb
            return QPoly(out)
        return self.scale(other)

    __rmul__ = __mul__

    def diff(self, axis: int) -> "QPoly":
        out = {}
        for expo, c in self.terms.items():
            k = expo[axis]
            if k:
                e = list(expo)
                e[axis] = k - 1
                te = tuple(e)
                out[te] = out.get(te, 0.0) + k * c
        return QPoly(out)

    def conj(self) -> "QPoly":
        return QPoly({e: c.conjugate() for e, c in self.terms.items()})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def mul_variable(self, axis: int, power: int = 1) -> "QPoly":
        out = {}
        for expo, c in self.terms.items():
            e = list(expo)
            e[axis] += power
            out[tuple(e)] = c
        return QPoly(out)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, q: np.ndarray):
        """Evaluate at q with shape (..., 4); returns a complex array."""
        q = np.asarray(q, dtype=float)
        pows = _power_table(q, self.degree)
        out = np.zeros(q.shape[:-1], dtype=complex)
        for (a, b, c, d), coef in self.terms.items():
            out += coef * (pows[0][a] * pows[1][b] * pows[2][c] * pows[3][d])
        return out

    def __repr__(self) -> str:
        items = sorted(self.terms.items())[:6]
        body = " + ".join(f"{c:.3g}*q^{e}" for e, c in items)
        more = "" if len(self.terms) <= 6 else f" (+{len(self.terms) - 6} terms)"
        return f"QPoly({body}{more})"


def _power_table(q: np.ndarray, max_degree: int) -> list[list[np.ndarray]]:
    """pows[i][d] = q_i ** d computed once per axis."""
    pows = []
    for i in range(4):
        col = [np.ones(q.shape[:-1])]
        for _ in range(max_degree):
            col.append(col[-1] * q[..., i])
        pows.append(col)
    return pows


def eval_many(polys: list[QPoly], q: np.ndarray) -> np.ndarray:
    """Evaluate a family of polynomials on shared points.

    Returns an array of shape (len(polys),) + q.shape[:-1].  The shared
    monomial basis is evaluated once, which is what makes large Gram
    matrices cheap.
    """
    monos = sorted({e for p in polys for e in p.terms})
    index = {e: k for k, e in enumerate(monos)}
    max_degree = max((sum(e) for e in monos), default=0)
    q = np.asarray(q, dtype=float)
    pows = _power_table(q, max_degree)
    npts = int(np.prod(q.shape[:-1])) if q.ndim > 1 else 1
    M = np.empty((len(monos), npts))
    for k, (a, b, c, d) in enumerate(monos):
        M[k] = (pows[0][a] * pows[1][b] * pows[2][c] * pows[3][d]).reshape(-1)
    C = np.zeros((len(polys), len(monos)), dtype=complex)
    for r, p in enumerate(polys):
        for e, coef in p.terms.items():
            C[r, index[e]] = coef
    vals = C @ M
    return vals.reshape((len(polys),) + q.shape[:-1])
