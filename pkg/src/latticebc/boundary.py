"""Macroscale boundary conditions from microscale boundary data.

At a domain end the displacement pair u_0 of the first two columns is a
combination of the decaying and neutral modes of the cell map (growing
modes would blow up across the domain).  Writing
u_0 = sum_i c_i v_i over the s-1 stable eigenvectors, the constant
vector, and the generalized vector gives s+1 unknowns.  The s microscale
boundary conditions plus the two definitions of the macroscale value and
slope at the wall yield s+2 equations; the resulting overdetermined
system M c = rhs is solvable only when rhs is orthogonal to the left
null space of M, and that solvability condition, rearranged, is the
macroscale boundary condition.

Macroscale rows: stable modes have died out where the macroscale model
lives, so the U row is (0 .. 0, 1, gamma_U) and the slope row is
(0 .. 0, 0, 1/(p h)).  The generalized entry gamma_U extrapolates the
cell averages of the generalized mode (which grow by exactly 1 per cell)
back to the wall at x = 0:

    gamma_U = mean(first_cell_gen) - (p - 1) / (2 p)

since the first cell's points have centroid (p-1)h/2 and the macroscale
slope of that mode is 1/(p h).

The mixed kind (two strands) has s+3 rows, a two-dimensional left null
space, and yields a full Cauchy pair (both U and dU/dx prescribed) at
the left end; the single right-end datum then carries no macroscale
content.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cellmap import CENTER_TOL, CellMap, build_cell_map
from .errors import KindUnsupported, NullSpaceDimension
from .lattice import BCKind, LatticeSpec, MicroBCSpec, reversed_spec

NULL_TOL = 1e-10


class MacroBCKind(str, Enum):
    ROBIN = "robin"
    NEUMANN = "neumann"
    CAUCHY_PAIR = "cauchy_pair"


@dataclass
class ConstraintSystem:
    """Boundary constraint matrix with bookkeeping for its RHS slots.

    Columns: (stable coefficients, constant mode, generalized mode).
    Rows: the microscale data rows, then U, then dU/dx.  `data_scale`
    maps user-facing data to the RHS entry of its row (e.g. a flux datum
    d enters the RHS as h*d).
    """

    matrix: np.ndarray
    rhs_labels: tuple
    data_scale: np.ndarray
    kind: BCKind
    side: str

    @property
    def n_data(self) -> int:
        return len(self.data_scale)


@dataclass
class MacroBC:
    """One derived macroscale boundary condition.

    robin:        U + d * dU/dx = sum(rhs_weights * data)
    neumann:      dU/dx = sum(rhs_weights * data)
    cauchy_pair:  U = sum(value_weights * data) and
                  dU/dx = sum(slope_weights * data)
    """

    kind: MacroBCKind
    side: str
    d: float | None
    rhs_weights: np.ndarray | None
    rhs_labels: tuple
    value_weights: np.ndarray | None = None
    slope_weights: np.ndarray | None = None
    null_vectors: np.ndarray | None = None  # left-null basis, columns


def _data_labels(kind: BCKind, side: str, s: int) -> tuple:
    if side == "left":
        b, d, inner = "b[0,{j}]", "d[0,{j}]", "b[1,0]"
    else:
        b, d, inner = "b[N,{j}]", "d[N,{j}]", "b[N-1,0]"
    if kind == BCKind.DIRICHLET:
        return tuple(b.format(j=j) for j in range(s))
    if kind == BCKind.FLUX:
        return tuple(d.format(j=j) for j in range(s))
    if kind == BCKind.ROBIN_LIKE:
        return tuple(b.format(j=j) for j in range(s))
    if kind == BCKind.CAUCHY_LIKE:
        return (b.format(j=0), inner)
    if kind == BCKind.MIXED:
        return (b.format(j=0), inner, b.format(j=1))
    raise KindUnsupported(f"unknown boundary kind {kind}")


def assemble_constraints(
    cm: CellMap, bc: MicroBCSpec, spec: LatticeSpec
) -> ConstraintSystem:
    """Build the (s+2) x (s+1) constraint system (s+3 rows for mixed)."""
    s, p, h = spec.s, spec.p, spec.h
    if cm.s != s:
        raise ValueError(f"cell map is for {cm.s} strands, spec has {s}")
    if bc.kind in (BCKind.CAUCHY_LIKE, BCKind.MIXED) and s != 2:
        raise KindUnsupported(f"{bc.kind.value} boundary conditions require s = 2, got s = {s}")

    # Basis columns restricted to the centre-stable modes.
    cols = [cm.stable_vectors[:, i] for i in range(cm.stable_vectors.shape[1])]
    cols.append(cm.center_vector)
    cols.append(cm.generalized_vector)

    if bc.kind == BCKind.DIRICHLET:
        if bc.values.shape != (s,):
            raise ValueError(f"dirichlet values must have shape ({s},)")
        funcs = [(lambda v, j=j: v[j]) for j in range(s)]
        scale = np.ones(s)
    elif bc.kind == BCKind.FLUX:
        if bc.values.shape != (s,):
            raise ValueError(f"flux values must have shape ({s},)")
        funcs = [(lambda v, j=j: v[s + j] - v[j]) for j in range(s)]
        scale = np.full(s, h)
    elif bc.kind == BCKind.ROBIN_LIKE:
        if bc.values.shape != (s, 2):
            raise ValueError(f"robin_like values must have shape ({s}, 2)")
        dvals = bc.values[:, 0]
        funcs = [
            (lambda v, j=j: v[j] + dvals[j] / h * (v[s + j] - v[j])) for j in range(s)
        ]
        scale = np.ones(s)
    elif bc.kind == BCKind.CAUCHY_LIKE:
        if bc.values.shape != (2,):
            raise ValueError("cauchy_like values must have shape (2,)")
        funcs = [lambda v: v[0], lambda v: v[s]]
        scale = np.ones(2)
    else:  # MIXED, left end only; the right-end datum adds no row
        funcs = [lambda v: v[0], lambda v: v[s], lambda v: v[1]]
        scale = np.ones(3)

    n_data = len(funcs)
    M = np.zeros((n_data + 2, s + 1))
    for r, f in enumerate(funcs):
        for cidx, v in enumerate(cols):
            M[r, cidx] = f(v)
    gamma_u = cm.first_cell_gen.mean() - (p - 1) / (2.0 * p)
    M[n_data, s - 1] = 1.0        # U row, constant column
    M[n_data, s] = gamma_u        # U row, generalized column
    M[n_data + 1, s] = 1.0 / (p * h)  # slope row, generalized column

    labels = _data_labels(bc.kind, bc.side, s) + ("U", "dU/dx")
    return ConstraintSystem(
        matrix=M, rhs_labels=labels, data_scale=scale, kind=bc.kind, side=bc.side
    )


def derive_macro_bc(cs: ConstraintSystem, null_tol: float = NULL_TOL) -> MacroBC:
    """Solvability condition of the constraint system, normalized.

    The left null space of M comes from the SVD (singular values below
    null_tol * sigma_max count as zero).  Generic kinds give one null
    vector w and the Robin form with U coefficient 1; the flux kind has
    zero U weight and is reported as a Neumann condition.  The mixed kind
    gives two null vectors, solved for the Cauchy pair.
    """
    M = cs.matrix
    n_data = cs.n_data
    U, sigma, _ = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(sigma > null_tol * sigma[0]))
    null = U[:, rank:]
    expected = 2 if cs.kind == BCKind.MIXED else 1
    if null.shape[1] != expected:
        raise NullSpaceDimension(
            f"left null space of the {cs.kind.value} system has dimension "
            f"{null.shape[1]}, expected {expected}; singular values {sigma}"
        )

    data_labels = cs.rhs_labels[:n_data]
    if cs.kind == BCKind.MIXED:
        # w^T rhs = 0 for both basis vectors: two equations in (U, dU/dx).
        G = null[n_data:, :].T            # (2, 2)
        Dw = (null[:n_data, :] * cs.data_scale[:, None]).T  # (2, n_data)
        if np.linalg.cond(G) > 1e12:
            raise NullSpaceDimension("cannot solve the mixed pair: degenerate (U, dU/dx) block")
        W = -np.linalg.solve(G, Dw)
        return MacroBC(
            kind=MacroBCKind.CAUCHY_PAIR,
            side=cs.side,
            d=None,
            rhs_weights=None,
            rhs_labels=data_labels,
            value_weights=W[0],
            slope_weights=W[1],
            null_vectors=null,
        )

    w = null[:, 0]
    w_data = w[:n_data] * cs.data_scale
    w_u = w[n_data]
    w_f = w[n_data + 1]
    wnorm = np.linalg.norm(w)
    if abs(w_u) >= null_tol * wnorm:
        return MacroBC(
            kind=MacroBCKind.ROBIN,
            side=cs.side,
            d=float(w_f / w_u),
            rhs_weights=-w_data / w_u,
            rhs_labels=data_labels,
            null_vectors=null,
        )
    if abs(w_f) < null_tol * wnorm:
        raise NullSpaceDimension("null vector has neither U nor dU/dx weight")
    return MacroBC(
        kind=MacroBCKind.NEUMANN,
        side=cs.side,
        d=None,
        rhs_weights=-w_data / w_f,
        rhs_labels=data_labels,
        null_vectors=null,
    )


def _two_strand_eigendata(cm: CellMap):
    if cm.s != 2:
        raise KindUnsupported("closed forms are derived for two strands only")
    v1 = cm.stable_vectors[:, 0]
    v3 = cm.generalized_vector
    q = 0.25 * (v3.sum() - 1.0)
    return v1, v3, q


def closed_form_bc(
    kind: BCKind, cm: CellMap, spec: LatticeSpec, values=None, side: str = "left"
) -> MacroBC:
    """Literal closed-form boundary conditions for s = 2, p = 2.

    Evaluates the explicit two-strand expressions with the same
    eigenvectors the numeric path uses; serves as its cross-oracle.
    Fails by zero division when the stable eigenvector has equal first
    components (strand-symmetric lattices); the SVD route is the
    authoritative one there.
    """
    kind = BCKind(kind)
    if spec.s != 2 or spec.p != 2:
        raise KindUnsupported(
            f"closed forms require s = 2, p = 2, got s = {spec.s}, p = {spec.p}"
        )
    h = spec.h
    v1, v3, q = _two_strand_eigendata(cm)
    labels = _data_labels(kind, side, 2)

    if kind == BCKind.DIRICHLET:
        delta = v1[0] - v1[1]
        d = -2.0 * h * ((v1[1] * v3[0] - v1[0] * v3[1]) / delta + q)
        weights = np.array([-v1[1], v1[0]]) / delta
        return MacroBC(MacroBCKind.ROBIN, side, float(d), weights, labels)

    if kind == BCKind.FLUX:
        denom = (v1[2] - v1[0]) * (v3[3] - v3[1]) - (v1[3] - v1[1]) * (v3[2] - v3[0])
        weights = np.array([-(v1[3] - v1[1]), (v1[2] - v1[0])]) / (2.0 * denom)
        return MacroBC(MacroBCKind.NEUMANN, side, None, weights, labels)

    if kind == BCKind.ROBIN_LIKE:
        values = np.asarray(values, dtype=float)
        d00, d01 = values[0, 0], values[1, 0]
        a1 = h * v1[0] + d00 * (v1[2] - v1[0])
        a2 = h * v1[1] + d01 * (v1[3] - v1[1])
        g1 = h * v3[0] + d00 * (v3[2] - v3[0])
        g2 = h * v3[1] + d01 * (v3[3] - v3[1])
        delta = a1 - a2
        w1 = a2 / delta
        w2 = -a1 / delta
        w4 = -2.0 * (a2 * g1 - a1 * g2) / delta - 0.5 * h * (v3.sum() - 1.0)
        return MacroBC(MacroBCKind.ROBIN, side, float(w4), np.array([-w1, -w2]), labels)

    if kind == BCKind.CAUCHY_LIKE:
        delta = v1[0] - v1[2]
        d = -2.0 * h * ((v1[2] * v3[0] - v1[0] * v3[2]) / delta + q)
        weights = np.array([-v1[2], v1[0]]) / delta
        return MacroBC(MacroBCKind.ROBIN, side, float(d), weights, labels)

    if kind == BCKind.MIXED:
        # Probe the affine pair formula on unit data to extract weights.
        p1 = (v1[2] * v3[0] - v1[0] * v3[2]) / (v1[0] - v1[2])
        denom = (v1[0] * v3[2] - v3[0] * v1[2]) * (v1[1] - v1[0]) + (
            v1[1] * v3[0] - v1[0] * v3[1]
        ) * (v1[2] - v1[0])

        def pair(b00, b10, b01):
            r1 = (v1[0] * b10 - v1[2] * b00) / (v1[0] - v1[2])
            dd = (
                v1[0]
                * ((v1[2] - v1[0]) * (b01 - b00) - (v1[1] - v1[0]) * (b10 - b00))
                / denom
            )
            return r1 - (p1 + q) * dd, -dd / (2.0 * h)

        basis = np.eye(3)
        probes = [pair(*basis[i]) for i in range(3)]
        value_w = np.array([pr[0] for pr in probes])
        slope_w = np.array([pr[1] for pr in probes])
        return MacroBC(
            MacroBCKind.CAUCHY_PAIR,
            side,
            None,
            None,
            labels,
            value_weights=value_w,
            slope_weights=slope_w,
        )

    raise KindUnsupported(f"no closed form for kind {kind}")


def left_end_bc(
    spec: LatticeSpec, bc: MicroBCSpec, center_tol: float = CENTER_TOL,
    null_tol: float = NULL_TOL,
) -> MacroBC:
    """Full left-end pipeline: cell map, constraints, solvability."""
    cm = build_cell_map(spec, center_tol=center_tol)
    cs = assemble_constraints(cm, bc, spec)
    return derive_macro_bc(cs, null_tol=null_tol)


def right_end_bc(
    spec: LatticeSpec, bc: MicroBCSpec, center_tol: float = CENTER_TOL,
    null_tol: float = NULL_TOL,
) -> MacroBC:
    """Right-end condition via lattice reversal and the chain-rule sign flip.

    The left-end pipeline runs on the reversed lattice (n' = N - n); in
    the reversed coordinate d/dx' = -d/dx, so the derivative coefficient
    changes sign when transforming back.  Boundary data conventions are
    mirror images of the left-end ones (differences point into the
    domain), so values pass through unchanged.
    """
    if bc.kind == BCKind.MIXED:
        raise KindUnsupported(
            "the mixed problem yields both macroscale conditions at the left end; "
            "the right-end datum adds none"
        )
    rspec = reversed_spec(spec)
    rbc = MicroBCSpec(bc.kind, bc.values, side="right")
    cm = build_cell_map(rspec, center_tol=center_tol)
    cs = assemble_constraints(cm, rbc, rspec)
    mb = derive_macro_bc(cs, null_tol=null_tol)
    if mb.kind == MacroBCKind.ROBIN:
        mb.d = -mb.d
    elif mb.kind == MacroBCKind.NEUMANN:
        mb.rhs_weights = -mb.rhs_weights
    mb.side = "right"
    return mb
