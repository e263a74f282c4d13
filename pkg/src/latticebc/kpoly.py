"""Polynomials in the wavenumber k, truncated after the k^2 term.

Every wavenumber-dependent quantity in the low-k expansion is carried as
its first three Taylor coefficients (k^0, k^1, k^2).  Products discard
any k^3-or-higher term on the spot, so a chain of operations stays exact
to O(k^3) without ever tracking the higher orders.

Coefficients are complex throughout; downstream code asserts reality of
final quantities where the physics requires it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Highest retained power of k.  Fixed project-wide; the data layout keeps
# the order implicit in the coefficient count so raising it is mechanical.
ORDER = 2


@dataclass(frozen=True)
class KPoly:
    """c0 + c1*k + c2*k^2 with complex coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        if len(c) != ORDER + 1:
            raise ValueError(f"expected {ORDER + 1} coefficients, got {len(c)}")
        object.__setattr__(self, "coeffs", c)

    @staticmethod
    def zero() -> "KPoly":
        return KPoly((0.0, 0.0, 0.0))

    @staticmethod
    def one() -> "KPoly":
        return KPoly((1.0, 0.0, 0.0))

    @staticmethod
    def constant(value) -> "KPoly":
        return KPoly((value, 0.0, 0.0))

    def __add__(self, other: "KPoly") -> "KPoly":
        a, b = self.coeffs, other.coeffs
        return KPoly((a[0] + b[0], a[1] + b[1], a[2] + b[2]))

    def __sub__(self, other: "KPoly") -> "KPoly":
        a, b = self.coeffs, other.coeffs
        return KPoly((a[0] - b[0], a[1] - b[1], a[2] - b[2]))

    def __neg__(self) -> "KPoly":
        a = self.coeffs
        return KPoly((-a[0], -a[1], -a[2]))

    def __mul__(self, other):
        if not isinstance(other, KPoly):
            z = complex(other)
            a = self.coeffs
            return KPoly((a[0] * z, a[1] * z, a[2] * z))
        a, b = self.coeffs, other.coeffs
        # The symmetric accumulation (a0*b2 + a2*b0) first keeps the
        # product exactly commutative in floating point.
        return KPoly(
            (
                a[0] * b[0],
                a[0] * b[1] + a[1] * b[0],
                (a[0] * b[2] + a[2] * b[0]) + a[1] * b[1],
            )
        )

    __rmul__ = __mul__

    def eval(self, k: float) -> complex:
        """Horner evaluation at a real wavenumber."""
        c = self.coeffs
        return (c[2] * k + c[1]) * k + c[0]

    def max_abs(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)


def exp_ikh(sign: int, h: float) -> KPoly:
    """Truncated exp(sign*i*k*h) = 1 + sign*i*h*k - h^2/2 * k^2."""
    if h <= 0:
        raise ValueError(f"spacing h must be positive, got {h}")
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return KPoly((1.0, sign * 1j * h, -0.5 * h * h))


class KPolyMatrix:
    """Dense matrix of truncated wavenumber polynomials.

    Stored as an (rows, cols, ORDER+1) complex array; axis 2 is the
    coefficient order.
    """

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=complex)
        if data.ndim != 3 or data.shape[2] != ORDER + 1:
            raise ValueError(f"expected (rows, cols, {ORDER + 1}) array, got {data.shape}")
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "KPolyMatrix":
        return cls(np.zeros((rows, cols, ORDER + 1), dtype=complex))

    @classmethod
    def from_entries(cls, entries) -> "KPolyMatrix":
        rows = len(entries)
        cols = len(entries[0])
        data = np.zeros((rows, cols, ORDER + 1), dtype=complex)
        for i in range(rows):
            if len(entries[i]) != cols:
                raise ValueError("ragged entry rows")
            for j in range(cols):
                data[i, j, :] = entries[i][j].coeffs
        return cls(data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def entry(self, i: int, j: int) -> KPoly:
        return KPoly(tuple(self.data[i, j, :]))

    def coefficient_matrix(self, order: int) -> np.ndarray:
        """The (rows, cols) matrix of order-`order` coefficients."""
        return self.data[:, :, order].copy()

    def apply(self, vec) -> list:
        """Matrix-vector product under truncated arithmetic.

        `vec` is a sequence of KPoly of length `cols`; returns a list of
        KPoly of length `rows`.
        """
        if len(vec) != self.cols:
            raise ValueError(f"dimension mismatch: {self.cols} columns, vector of {len(vec)}")
        v = np.array([w.coeffs for w in vec], dtype=complex)  # (cols, 3)
        out = apply_coeff(self.data, v)
        return [KPoly(tuple(row)) for row in out]

    def eval(self, k: float) -> np.ndarray:
        """Entry-wise Horner evaluation at a real wavenumber."""
        d = self.data
        return (d[:, :, 2] * k + d[:, :, 1]) * k + d[:, :, 0]


def apply_coeff(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Truncated product of an (n, m, 3) matrix with an (m, 3) vector."""
    m0, m1, m2 = mat[:, :, 0], mat[:, :, 1], mat[:, :, 2]
    v0, v1, v2 = vec[:, 0], vec[:, 1], vec[:, 2]
    out = np.empty((mat.shape[0], ORDER + 1), dtype=complex)
    out[:, 0] = m0 @ v0
    out[:, 1] = m0 @ v1 + m1 @ v0
    out[:, 2] = (m0 @ v2 + m2 @ v0) + m1 @ v1
    return out
