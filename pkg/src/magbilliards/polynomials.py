"""Dense real-coefficient polynomials in two variables.

Coefficients are stored as a 2-D array ``c[i, j]`` for the monomial
``x**i * y**j``.  Evaluation accepts real or complex arguments and
broadcasts over numpy arrays; partial derivatives are exact coefficient
shifts, so repeated differentiation loses nothing.
"""

from __future__ import annotations

import json

import numpy as np


def _trim(c: np.ndarray) -> np.ndarray:
    """Drop trailing zero rows/columns, keeping at least a 1x1 table."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    rows = np.nonzero(c.any(axis=1))[0]
    cols = np.nonzero(c.any(axis=0))[0]
    if rows.size == 0:
        return np.zeros((1, 1))
    return c[: rows[-1] + 1, : cols[-1] + 1].copy()


class BivariatePolynomial:
    """Polynomial sum_{i,j} c[i,j] x^i y^j with real coefficients."""

    def __init__(self, coeffs):
        self.coeffs = _trim(coeffs)

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls) -> "BivariatePolynomial":
        return cls(np.zeros((1, 1)))

    @classmethod
    def constant(cls, value: float) -> "BivariatePolynomial":
        return cls(np.array([[float(value)]]))

    @classmethod
    def monomial(cls, i: int, j: int, coeff: float = 1.0) -> "BivariatePolynomial":
        c = np.zeros((i + 1, j + 1))
        c[i, j] = coeff
        return cls(c)

    @classmethod
    def from_terms(cls, terms) -> "BivariatePolynomial":
        """Build from an iterable of (i, j, coeff)."""
        terms = list(terms)
        if not terms:
            return cls.zero()
        ni = max(t[0] for t in terms) + 1
        nj = max(t[1] for t in terms) + 1
        c = np.zeros((ni, nj))
        for i, j, v in terms:
            c[i, j] += v
        return cls(c)

    # -- basic queries ---------------------------------------------------

    @property
    def degree(self) -> int:
        nz = np.argwhere(self.coeffs != 0.0)
        if nz.size == 0:
            return 0
        return int((nz[:, 0] + nz[:, 1]).max())

    @property
    def coeff_max(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def __repr__(self) -> str:
        return f"BivariatePolynomial(degree={self.degree}, shape={self.coeffs.shape})"

    # -- evaluation ------------------------------------------------------

    def __call__(self, x, y):
        """Evaluate by Horner in y inside Horner in x; complex-safe."""
        x = np.asarray(x)
        y = np.asarray(y)
        c = self.coeffs
        acc = None
        for i in range(c.shape[0] - 1, -1, -1):
            row = c[i]
            inner = np.zeros_like(y, dtype=np.result_type(row.dtype, y.dtype))
            for j in range(c.shape[1] - 1, -1, -1):
                inner = inner * y + row[j]
            acc = inner if acc is None else acc * x + inner
        if acc.ndim == 0:
            return acc[()]
        return acc

    def eval_points(self, pts):
        """Evaluate at an (n, 2) array of points."""
        pts = np.asarray(pts)
        return self(pts[..., 0], pts[..., 1])

    # -- calculus ----------------------------------------------------------

    def diff_x(self) -> "BivariatePolynomial":
        c = self.coeffs
        if c.shape[0] == 1:
            return BivariatePolynomial.zero()
        return BivariatePolynomial(c[1:] * np.arange(1, c.shape[0])[:, None])

    def diff_y(self) -> "BivariatePolynomial":
        c = self.coeffs
        if c.shape[1] == 1:
            return BivariatePolynomial.zero()
        return BivariatePolynomial(c[:, 1:] * np.arange(1, c.shape[1])[None, :])

    def gradient(self):
        return self.diff_x(), self.diff_y()

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, BivariatePolynomial):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return BivariatePolynomial.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        ni = max(self.coeffs.shape[0], other.coeffs.shape[0])
        nj = max(self.coeffs.shape[1], other.coeffs.shape[1])
        c = np.zeros((ni, nj))
        c[: self.coeffs.shape[0], : self.coeffs.shape[1]] += self.coeffs
        c[: other.coeffs.shape[0], : other.coeffs.shape[1]] += other.coeffs
        return BivariatePolynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePolynomial(-self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return BivariatePolynomial(self.coeffs * float(other))
        if not isinstance(other, BivariatePolynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        c = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                if a[i, j] != 0.0:
                    c[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
        return BivariatePolynomial(c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = BivariatePolynomial.constant(1.0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # -- structure ---------------------------------------------------------

    def homogeneous_part(self, d: int) -> np.ndarray:
        """Coefficients [c_{0,d}, c_{1,d-1}, ..., c_{d,0}] of total degree d."""
        out = np.zeros(d + 1)
        c = self.coeffs
        for i in range(min(d, c.shape[0] - 1) + 1):
            j = d - i
            if j < c.shape[1]:
                out[i] = c[i, j]
        return out

    # -- interchange ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        terms = [
            {"i": int(i), "j": int(j), "c": float(self.coeffs[i, j])}
            for i, j in np.argwhere(self.coeffs != 0.0)
        ]
        return {"degree": self.degree, "terms": terms}

    @classmethod
    def from_json_dict(cls, data: dict) -> "BivariatePolynomial":
        terms = [(t["i"], t["j"], t["c"]) for t in data.get("terms", [])]
        poly = cls.from_terms(terms)
        if "degree" in data and poly.degree > int(data["degree"]):
            raise ValueError(
                f"terms exceed declared degree {data['degree']} (got {poly.degree})"
            )
        return poly

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "BivariatePolynomial":
        return cls.from_json_dict(json.loads(text))
