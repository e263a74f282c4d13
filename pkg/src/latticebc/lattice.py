"""Lattice description and assembly of the operators every stage uses.

Index conventions
-----------------
A cell has s strands (index j = 0..s-1) and p longitudinal sub-cell
columns (index m = 0..p-1).  The flat ordering of the s*p masses in a
cell is ``flat = m*s + j``: all strands of column 0, then all strands of
column 1, and so on.  A global longitudinal index n maps into the cell
arrays through ``m = n mod p``.

Parameters
----------
``kappa_long[m][j]``   longitudinal elasticity between masses (m, j) and
                       (m+1, j) along strand j,
``kappa_cross[m][i][j]`` cross elasticity linking strands i and j at
                       column m (symmetric, zero diagonal),
``rho[m][j]``          density of mass (m, j).

The operators built here: the diagonal mass matrix B = h^2 diag(rho),
the Fourier-space stiffness L_k (truncated in k, and exact for the
dispersion oracle), its k=0 limit L_0, and the quasi-steady operator
whose rows are the equilibrium equations of interior masses.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import SpecValidationError
from .kpoly import KPolyMatrix, exp_ikh


class CellIndex(NamedTuple):
    """Position of a mass within a cell and its flat vector index."""

    m: int
    j: int
    flat: int

    @classmethod
    def from_mj(cls, s: int, m: int, j: int) -> "CellIndex":
        return cls(m, j, m * s + j)

    @classmethod
    def from_flat(cls, s: int, flat: int) -> "CellIndex":
        return cls(flat // s, flat % s, flat)


@dataclass(frozen=True)
class LatticeSpec:
    """Complete description of a periodic spring-mass lattice.

    `N` is the number of longitudinal intervals of the finite domain
    (masses sit at n = 0..N); it only enters domain-level computations,
    not the cell-level operators.
    """

    s: int
    p: int
    h: float
    N: int
    kappa_long: np.ndarray
    kappa_cross: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "N", int(self.N))
        for name in ("kappa_long", "kappa_cross", "rho"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cell(self) -> int:
        """Number of masses in one cell."""
        return self.s * self.p

    def flat(self, m: int, j: int) -> int:
        return (m % self.p) * self.s + j

    def is_connected(self) -> bool:
        """True when every pair of strands is linked at every column."""
        if self.s == 1:
            return True
        off = self.kappa_cross[:, ~np.eye(self.s, dtype=bool)]
        return bool(np.all(off > 0.0))


class BCKind(str, Enum):
    DIRICHLET = "dirichlet"
    FLUX = "flux"
    ROBIN_LIKE = "robin_like"
    CAUCHY_LIKE = "cauchy_like"
    MIXED = "mixed"


@dataclass(frozen=True)
class MicroBCSpec:
    """Microscale boundary data at one end of the domain.

    values by kind (per strand j unless noted):
      dirichlet    (s,)   prescribed displacements b_j
      flux         (s,)   prescribed gradients d_j; the microscale
                          constraint is u_inner - u_boundary = h*d_j with
                          the difference pointing into the domain
      robin_like   (s,2)  pairs (d_j, b_j): u_b + (d_j/h)(u_in - u_b) = b_j
      cauchy_like  (2,)   both values on strand 0: boundary mass and its
                          inward neighbour (two strands only)
      mixed        left: (3,) = (b[0,0], b[1,0], b[0,1]); right: (1,)
                          (two strands only)
    """

    kind: BCKind
    values: np.ndarray
    side: str = "left"

    def __post_init__(self):
        object.__setattr__(self, "kind", BCKind(self.kind))
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")

    @staticmethod
    def dirichlet_zero(s: int, side: str = "left") -> "MicroBCSpec":
        return MicroBCSpec(BCKind.DIRICHLET, np.zeros(s), side)


def validate_spec(spec: LatticeSpec) -> list:
    """Collect invariant violations; empty list means a valid spec."""
    v = []
    if spec.s < 1:
        v.append(f"strand count s={spec.s} must be >= 1")
    if spec.p < 1:
        v.append(f"periodicity p={spec.p} must be >= 1")
    if not spec.h > 0:
        v.append(f"spacing h={spec.h} must be positive")
    if spec.N < 2:
        v.append(f"interval count N={spec.N} must be >= 2")
    if spec.s < 1 or spec.p < 1:
        return v
    s, p = spec.s, spec.p
    if spec.kappa_long.shape != (p, s):
        v.append(f"kappa_long shape {spec.kappa_long.shape} != ({p}, {s})")
    if spec.rho.shape != (p, s):
        v.append(f"rho shape {spec.rho.shape} != ({p}, {s})")
    if spec.kappa_cross.shape != (p, s, s):
        v.append(f"kappa_cross shape {spec.kappa_cross.shape} != ({p}, {s}, {s})")
    if v:
        return v
    for m in range(p):
        for j in range(s):
            if not spec.kappa_long[m, j] > 0:
                v.append(f"nonpositive longitudinal elasticity kappa_long[{m}][{j}]")
            if not spec.rho[m, j] > 0:
                v.append(f"nonpositive density rho[{m}][{j}]")
    for m in range(p):
        kc = spec.kappa_cross[m]
        if not np.array_equal(kc, kc.T):
            v.append(f"asymmetric cross elasticity at column {m}")
        if np.any(np.diag(kc) != 0.0):
            v.append(f"nonzero self elasticity at column {m}")
        if np.any(kc < 0.0):
            v.append(f"negative cross elasticity at column {m}")
    return v


def check_spec(spec: LatticeSpec) -> LatticeSpec:
    """Raise SpecValidationError unless the spec is valid."""
    violations = validate_spec(spec)
    if violations:
        raise SpecValidationError(violations)
    return spec


def _kappa_plus(spec: LatticeSpec, m: int, j: int) -> float:
    """Total elasticity attached to mass (m, j)."""
    p = spec.p
    return (
        spec.kappa_long[(m - 1) % p, j]
        + spec.kappa_long[m % p, j]
        + spec.kappa_cross[m % p, :, j].sum()
    )


def build_B(spec: LatticeSpec) -> np.ndarray:
    """Diagonal mass matrix h^2 * diag(rho) in flat cell ordering."""
    return np.diag(spec.h ** 2 * spec.rho.reshape(-1))


def build_L0(spec: LatticeSpec) -> np.ndarray:
    """Zero-wavenumber stiffness; symmetric with zero row sums."""
    s, p = spec.s, spec.p
    n = s * p
    L0 = np.zeros((n, n))
    for m in range(p):
        for j in range(s):
            r = m * s + j
            L0[r, r] -= _kappa_plus(spec, m, j)
            for i in range(s):
                if i != j:
                    L0[r, m * s + i] += spec.kappa_cross[m, i, j]
            L0[r, ((m + 1) % p) * s + j] += spec.kappa_long[m, j]
            L0[r, ((m - 1) % p) * s + j] += spec.kappa_long[(m - 1) % p, j]
    return L0


def build_Lk(spec: LatticeSpec) -> KPolyMatrix:
    """Fourier-space stiffness with exponentials truncated at order k^2.

    Hermitian when evaluated at real k; the k^0 part equals build_L0.
    """
    s, p = spec.s, spec.p
    n = s * p
    epos = exp_ikh(+1, spec.h).as_array()
    eneg = exp_ikh(-1, spec.h).as_array()
    M = KPolyMatrix.zeros(n, n)
    for m in range(p):
        for j in range(s):
            r = m * s + j
            M.data[r, r, 0] -= _kappa_plus(spec, m, j)
            for i in range(s):
                if i != j:
                    M.data[r, m * s + i, 0] += spec.kappa_cross[m, i, j]
            M.data[r, ((m + 1) % p) * s + j, :] += spec.kappa_long[m, j] * epos
            M.data[r, ((m - 1) % p) * s + j, :] += spec.kappa_long[(m - 1) % p, j] * eneg
    return M


def build_Lk_exact(spec: LatticeSpec, k: float) -> np.ndarray:
    """Fourier-space stiffness with exact exponentials at wavenumber k.

    Kept independent of the truncated path so the dispersion computation
    can serve as an oracle for the low-k expansion.
    """
    s, p = spec.s, spec.p
    n = s * p
    epos = np.exp(1j * k * spec.h)
    eneg = np.exp(-1j * k * spec.h)
    L = np.zeros((n, n), dtype=complex)
    for m in range(p):
        for j in range(s):
            r = m * s + j
            L[r, r] -= _kappa_plus(spec, m, j)
            for i in range(s):
                if i != j:
                    L[r, m * s + i] += spec.kappa_cross[m, i, j]
            L[r, ((m + 1) % p) * s + j] += spec.kappa_long[m, j] * epos
            L[r, ((m - 1) % p) * s + j] += spec.kappa_long[(m - 1) % p, j] * eneg
    return L


def build_steady_operator(spec: LatticeSpec, rows: int | None = None) -> np.ndarray:
    """Quasi-steady equilibrium equations as an (s*rows, s*(rows+2)) matrix.

    Row (n, j), n = 1..rows, holds the coefficients of the zero-RHS force
    balance on mass (n, j); columns run over masses n = 0..rows+1 in flat
    ordering.  Every row sums to zero.
    """
    if rows is None:
        rows = spec.p
    if rows < 1:
        raise ValueError(f"rows={rows} must be >= 1")
    s = spec.s
    A = np.zeros((s * rows, s * (rows + 2)))
    for n in range(1, rows + 1):
        mn = n % spec.p
        mp = (n - 1) % spec.p
        for j in range(s):
            r = (n - 1) * s + j
            A[r, (n - 1) * s + j] += spec.kappa_long[mp, j]
            A[r, (n + 1) * s + j] += spec.kappa_long[mn, j]
            for i in range(s):
                if i != j:
                    A[r, n * s + i] += spec.kappa_cross[mn, i, j]
            A[r, n * s + j] -= _kappa_plus(spec, n, j)
    return A


def reversed_spec(spec: LatticeSpec) -> LatticeSpec:
    """The lattice seen from the right end, n' = N - n.

    A longitudinal spring between columns n and n+1 becomes the spring
    between reversed columns N-n-1 and N-n; point quantities at column n
    move to column N-n.
    """
    p, N = spec.p, spec.N
    idx_point = [(N - m) % p for m in range(p)]
    idx_spring = [(N - m - 1) % p for m in range(p)]
    return LatticeSpec(
        s=spec.s,
        p=p,
        h=spec.h,
        N=N,
        kappa_long=spec.kappa_long[idx_spring],
        kappa_cross=spec.kappa_cross[idx_point],
        rho=spec.rho[idx_point],
    )
