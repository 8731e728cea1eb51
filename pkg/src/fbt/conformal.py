"""Extremal length: closed forms, certified bounds, and a grid solver.

Closed forms: a round annulus {r < |z| < R} has extremal length
2 pi / log(R/r) (of the family of closed curves separating the boundary
circles); a rectangle with horizontal side b and vertical side a has
extremal length a/b (curves joining the horizontal sides); a flat
cylinder of given circumference and height has circumference/height for
the core-curve family, via z -> exp(2 pi z / circumference).

T^{alpha,sigma} is the flat torus C/(Z + i alpha Z) minus a closed
(1-sigma) x (alpha-sigma) rectangle; its fundamental domain is a cross of
two laths of width sigma.  The embedded vertical lath is a flat cylinder
giving the certified upper bound alpha/sigma for the extremal length of
the annulus of the vertical generator, and 1/sigma for the horizontal
one.  Rounding the skeleton corners by quarter-circles and mapping a
sigma/2-thick band around the skeleton gives a 2-quasiconformal annulus
of extremal length at most 2(2 alpha + 1)/sigma around ANY primitive
class that is a product of at most three generators, hence the upper
bound 4(2 alpha + 1)/sigma for lambda_3.

The grid solver discretizes the Dirichlet energy with the 5-point
Laplacian on cell centers (a node belongs to the domain iff its cell
center does), unit interior conductances and conductance-2 half edges to
Dirichlet boundary values, and solves by conjugate gradients; the curve
family extremal length is the direct or reciprocal effective conductance
depending on the family orientation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class AnnulusSpec:
    kind: str  # "round" | "rectangle" | "flat-cylinder"
    params: tuple[float, float]

    def __post_init__(self):
        a, b = self.params
        if self.kind == "round":
            if not 0 < a < b:
                raise ValidationError("round annulus needs 0 < r < R")
        elif self.kind in ("rectangle", "flat-cylinder"):
            if a <= 0 or b <= 0:
                raise ValidationError("side lengths must be positive")
        else:
            raise ValidationError(f"unknown annulus kind {self.kind!r}")


def round_annulus(r: float, big_r: float) -> AnnulusSpec:
    return AnnulusSpec("round", (r, big_r))


def rectangle(a: float, b: float) -> AnnulusSpec:
    """Vertical side a, horizontal side b."""
    return AnnulusSpec("rectangle", (a, b))


def flat_cylinder(circumference: float, height: float) -> AnnulusSpec:
    return AnnulusSpec("flat-cylinder", (circumference, height))


def lambda_closed_form(spec: AnnulusSpec) -> float:
    if spec.kind == "round":
        r, big_r = spec.params
        return 2.0 * math.pi / math.log(big_r / r)
    if spec.kind == "rectangle":
        a, b = spec.params
        return a / b
    circ, height = spec.params
    return circ / height


@dataclass(frozen=True)
class TorusWithHole:
    alpha: float
    sigma: float

    def __post_init__(self):
        if self.alpha < 1:
            raise ValidationError("alpha must be >= 1")
        if not 0 < self.sigma < 1:
            raise ValidationError("sigma must lie in (0,1)")


def generator_upper_bounds(x: TorusWithHole) -> dict[str, float]:
    """Certified upper bounds for the generator annuli: the embedded
    vertical lath gives alpha/sigma, the horizontal one 1/sigma."""
    return {
        "e": lambda_closed_form(flat_cylinder(x.alpha, x.sigma)),
        "e_prime": lambda_closed_form(flat_cylinder(1.0, x.sigma)),
    }


def prop1a_lambda3_upper(x: TorusWithHole) -> float:
    """4(2 alpha + 1)/sigma: skeleton length 2 alpha + 1, quarter-circle
    corner rounding with Beltrami bound 1/3, dilatation K = 2, band width
    sigma/2."""
    return 4.0 * (2.0 * x.alpha + 1.0) / x.sigma


# ---------------------------------------------------------------------------
# grid solver


@dataclass
class GridDomain:
    """Masked rectangular lattice of cell centers.

    mode "dirichlet": marked_a / marked_b hold boundary values 1 / 0 on
    cells OUTSIDE the domain mask (the Dirichlet contact happens across
    half edges of conductance 2).  mode "periodic-y": the strip is closed
    in y with a unit potential jump across the seam, which measures the
    harmonic 1-form of the wrapping family.
    """

    h: float
    x0: float
    y0: float
    inside: np.ndarray            # bool (ny, nx)
    mode: str = "dirichlet"
    marked_a: np.ndarray | None = None
    marked_b: np.ndarray | None = None
    family: str = "separating"    # which curve family the caller asks about
    x_guess: np.ndarray | None = None
    max_iter: int = 20000

    def __post_init__(self):
        if self.mode not in ("dirichlet", "periodic-y"):
            raise ValidationError(f"unknown grid mode {self.mode!r}")
        if self.family not in ("separating", "joining"):
            raise ValidationError(f"unknown family {self.family!r}")
        if not self.inside.any():
            raise ValidationError("empty grid domain")
        from scipy.ndimage import label

        _, ncomp = label(self.inside)
        if ncomp != 1:
            raise ValidationError("grid domain must be connected")
        if self.mode == "dirichlet":
            if self.marked_a is None or self.marked_b is None:
                raise ValidationError("dirichlet mode needs both marked families")
            if not self.marked_a.any() or not self.marked_b.any():
                raise ValidationError("marked families must be nonempty")
            if (self.marked_a & self.marked_b).any():
                raise ValidationError("marked families must be disjoint")


@dataclass
class SolverReport:
    lam: float
    h: float
    iterations: int
    residual: float
    conductance: float

    def to_json(self) -> dict:
        return {"lambda": self.lam, "h": self.h, "iterations": self.iterations,
                "residual": self.residual}


def _threads() -> int | None:
    val = os.environ.get("FBT_THREADS")
    return int(val) if val else None


def grid_extremal_length(dom: GridDomain, rtol: float = 1e-10) -> SolverReport:
    """Solve the discrete Laplace problem and convert the effective
    conductance into the requested curve-family extremal length."""
    if dom.mode == "dirichlet":
        energy, iters, res = _solve_dirichlet(dom, rtol)
        lam = energy if dom.family == "separating" else 1.0 / energy
    else:
        # the jump form measures the conductance of the wrapping cycle, the
        # reciprocal of the wrapping (separating) family's extremal length
        energy, iters, res = _solve_periodic(dom, rtol)
        lam = 1.0 / energy if dom.family == "separating" else energy
    return SolverReport(lam, dom.h, iters, res, energy)


def _cg(a: sp.csr_matrix, rhs: np.ndarray, x0: np.ndarray | None,
        rtol: float, max_iter: int) -> tuple[np.ndarray, int, float]:
    count = [0]

    def cb(_):
        count[0] += 1

    try:
        import pyamg

        ml = pyamg.ruge_stuben_solver(sp.csr_matrix(a))
        precond = ml.aspreconditioner(cycle="V")
    except Exception:
        inv_diag = 1.0 / a.diagonal()
        precond = spla.LinearOperator(a.shape, matvec=lambda v: inv_diag * v)
    kw = {"maxiter": max_iter, "M": precond, "x0": x0, "callback": cb}
    try:
        x, info = spla.cg(a, rhs, rtol=rtol, atol=0.0, **kw)
    except TypeError:  # scipy < 1.12 spelling
        x, info = spla.cg(a, rhs, tol=rtol, atol=0.0, **kw)
    res = float(np.linalg.norm(rhs - a @ x) / np.linalg.norm(rhs))
    if info != 0 or not np.isfinite(res) or res > 10 * rtol:
        raise NumericalError(
            f"conjugate gradients failed to converge: residual {res:.3e}")
    return x, count[0], res


def _assemble(inside: np.ndarray):
    ny, nx = inside.shape
    idx = -np.ones(inside.shape, dtype=np.int64)
    idx[inside] = np.arange(int(inside.sum()))
    return idx


def _solve_dirichlet(dom: GridDomain, rtol: float):
    inside = dom.inside
    idx = _assemble(inside)
    n = int(inside.sum())
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    diag = np.zeros(n)
    rhs = np.zeros(n)

    def shift(mask, dy, dx):
        out = np.zeros_like(mask)
        src = mask[max(0, -dy):mask.shape[0] - max(0, dy),
                   max(0, -dx):mask.shape[1] - max(0, dx)]
        out[max(0, dy):mask.shape[0] - max(0, -dy),
            max(0, dx):mask.shape[1] - max(0, -dx)] = src
        return out

    for dy, dx in ((0, 1), (1, 0)):
        nb_inside = shift(inside, dy, dx)
        both = inside & nb_inside
        i = idx[both]
        jmask = shift(both, -dy, -dx)
        j = idx[jmask]
        rows.append(i)
        cols.append(j)
        vals.append(-np.ones(i.size))
        np.add.at(diag, i, 1.0)
        np.add.at(diag, j, 1.0)

    # boundary half edges: inside node next to a marked outside cell
    for marked, value in ((dom.marked_a, 1.0), (dom.marked_b, 0.0)):
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            touch = inside & shift(marked, -dy, -dx)
            i = idx[touch]
            np.add.at(diag, i, 2.0)
            if value:
                np.add.at(rhs, i, 2.0 * value)

    rows_arr = np.concatenate(rows + cols)
    cols_arr = np.concatenate(cols + rows)
    vals_arr = np.concatenate(vals + vals)
    a = sp.coo_matrix(
        (np.concatenate([vals_arr, diag]),
         (np.concatenate([rows_arr, np.arange(n)]),
          np.concatenate([cols_arr, np.arange(n)]))),
        shape=(n, n)).tocsr()
    if (a.diagonal() <= 0).any():
        raise ValidationError("grid has isolated nodes")

    x0 = None
    if dom.x_guess is not None:
        x0 = dom.x_guess[inside]
    u, iters, res = _cg(a, rhs, x0, rtol, dom.max_iter)

    # energy = sum over edges of conductance * (du)^2
    ufield = np.zeros(inside.shape)
    ufield[inside] = u
    energy = 0.0
    for dy, dx in ((0, 1), (1, 0)):
        both = inside & shift(inside, dy, dx)
        du = ufield[both] - ufield[shift(both, -dy, -dx)]
        energy += float(np.sum(du * du))
    for marked, value in ((dom.marked_a, 1.0), (dom.marked_b, 0.0)):
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            touch = inside & shift(marked, -dy, -dx)
            du = value - ufield[touch]
            energy += float(np.sum(2.0 * du * du))
    return energy, iters, res


def _solve_periodic(dom: GridDomain, rtol: float):
    """Periodic in y with a unit potential jump across the seam."""
    inside = dom.inside
    ny, nx = inside.shape
    if not inside[0].any() or not inside[-1].any():
        raise ValidationError("periodic direction must touch both edges")
    idx = _assemble(inside)
    n = int(inside.sum())
    diag = np.zeros(n)
    rhs = np.zeros(n)
    rows = []
    cols = []

    def add_edge(i, j, jump=0.0):
        rows.append(i)
        cols.append(j)
        diag[i] += 1.0
        diag[j] += 1.0
        if jump:
            rhs[i] += jump
            rhs[j] -= jump

    for y in range(ny):
        for x in range(nx):
            if not inside[y, x]:
                continue
            if x + 1 < nx and inside[y, x + 1]:
                add_edge(idx[y, x], idx[y, x + 1])
            if y + 1 < ny:
                if inside[y + 1, x]:
                    add_edge(idx[y, x], idx[y + 1, x])
            else:
                if inside[0, x]:
                    add_edge(idx[y, x], idx[0, x], jump=1.0)

    rows_arr = np.array(rows + cols)
    cols_arr = np.array(cols + rows)
    vals_arr = -np.ones(rows_arr.size)
    a = sp.coo_matrix(
        (np.concatenate([vals_arr, diag + 1e-12]),
         (np.concatenate([rows_arr, np.arange(n)]),
          np.concatenate([cols_arr, np.arange(n)]))),
        shape=(n, n)).tocsr()
    u, iters, res = _cg(a, rhs, None, rtol, dom.max_iter)

    energy = 0.0
    ufield = np.zeros(inside.shape)
    ufield[inside] = u
    for y in range(ny):
        for x in range(nx):
            if not inside[y, x]:
                continue
            if x + 1 < nx and inside[y, x + 1]:
                energy += (ufield[y, x + 1] - ufield[y, x]) ** 2
            if y + 1 < ny:
                if inside[y + 1, x]:
                    energy += (ufield[y + 1, x] - ufield[y, x]) ** 2
            else:
                if inside[0, x]:
                    energy += (ufield[0, x] - ufield[y, x] + 1.0) ** 2
    return energy, iters, res


# ---------------------------------------------------------------------------
# domain builders


def annulus_grid(r: float, big_r: float, h: float,
                 family: str = "separating") -> GridDomain:
    """Round annulus r < |z| < R; marked families are the inner and outer
    complements.  The analytic potential log(R/|z|)/log(R/r) seeds the CG
    iteration."""
    if not 0 < r < big_r:
        raise ValidationError("need 0 < r < R")
    half = big_r + 2 * h
    m = int(math.ceil(2 * half / h))
    xs = (np.arange(m) + 0.5) * h - half
    xx, yy = np.meshgrid(xs, xs)
    rr = np.hypot(xx, yy)
    inside = (rr > r) & (rr < big_r)
    marked_a = rr <= r
    marked_b = rr >= big_r
    guess = np.clip(np.log(big_r / np.maximum(rr, 1e-12)) / math.log(big_r / r),
                    0.0, 1.0)
    return GridDomain(h, -half, -half, inside, "dirichlet",
                      marked_a, marked_b, family, x_guess=guess)


def rectangle_grid(a: float, b: float, h: float,
                   marked: str = "horizontal",
                   family: str = "joining") -> GridDomain:
    """Rectangle with vertical side a and horizontal side b.

    marked="horizontal" marks the two horizontal sides (top/bottom), so the
    joining family runs vertically and has extremal length a/b.
    """
    nx = max(2, int(round(b / h)))
    ny = max(2, int(round(a / h)))
    inside = np.zeros((ny + 2, nx + 2), dtype=bool)
    inside[1:-1, 1:-1] = True
    marked_a = np.zeros_like(inside)
    marked_b = np.zeros_like(inside)
    if marked == "horizontal":
        marked_a[-1, 1:-1] = True
        marked_b[0, 1:-1] = True
        guess = np.tile(((np.arange(ny + 2) - 0.5) / ny)[:, None], (1, nx + 2))
    elif marked == "vertical":
        marked_a[1:-1, -1] = True
        marked_b[1:-1, 0] = True
        guess = np.tile((np.arange(nx + 2) - 0.5) / nx, (ny + 2, 1))
    else:
        raise ValidationError("marked must be horizontal or vertical")
    return GridDomain(h, 0.0, 0.0, inside, "dirichlet", marked_a, marked_b,
                      family, x_guess=np.clip(guess, 0.0, 1.0))


def cylinder_grid(circumference: float, height: float, h: float) -> GridDomain:
    """Flat cylinder, periodic in y (the circumference direction)."""
    nx = max(2, int(round(height / h)))
    ny = max(2, int(round(circumference / h)))
    inside = np.ones((ny, nx), dtype=bool)
    return GridDomain(h, 0.0, 0.0, inside, "periodic-y", family="separating")


# ---------------------------------------------------------------------------
# file formats


def spec_to_json(spec: AnnulusSpec) -> dict:
    if spec.kind == "round":
        params = {"r": spec.params[0], "R": spec.params[1]}
    elif spec.kind == "rectangle":
        params = {"a": spec.params[0], "b": spec.params[1]}
    else:
        params = {"circumference": spec.params[0], "height": spec.params[1]}
    return {"kind": spec.kind, "params": params}


def spec_from_json(data: dict) -> AnnulusSpec:
    try:
        kind = data["kind"]
        p = data["params"]
        if kind == "round":
            return round_annulus(float(p["r"]), float(p["R"]))
        if kind == "rectangle":
            return rectangle(float(p["a"]), float(p["b"]))
        if kind == "flat-cylinder":
            return flat_cylinder(float(p["circumference"]), float(p["height"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad domain file: {exc}") from None
    raise ValidationError(f"unknown annulus kind {data.get('kind')!r}")


def dump_grid_csv(dom: GridDomain, path: str) -> None:
    """Node list: x,y,marked with marked in {a, b, none}."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "marked"])
        ny, nx = dom.inside.shape
        for j in range(ny):
            for i in range(nx):
                if not dom.inside[j, i]:
                    continue
                x = dom.x0 + (i + 0.5) * dom.h
                y = dom.y0 + (j + 0.5) * dom.h
                mark = "none"
                if dom.marked_a is not None and _touches(dom.inside, dom.marked_a, j, i):
                    mark = "a"
                elif dom.marked_b is not None and _touches(dom.inside, dom.marked_b, j, i):
                    mark = "b"
                writer.writerow([repr(x), repr(y), mark])


def _touches(inside: np.ndarray, marked: np.ndarray, j: int, i: int) -> bool:
    ny, nx = inside.shape
    for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        jj, ii = j + dj, i + di
        if 0 <= jj < ny and 0 <= ii < nx and marked[jj, ii]:
            return True
    return False
