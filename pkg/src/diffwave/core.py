"""Model parameters, uniform grids, finite-difference stencils, discrete norms,
and the tridiagonal solve that the profile, solver, and analysis layers build on.

All operations are pure functions of immutable inputs; nothing here keeps
internal state, so values can be shared freely between threads or processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "ModelParams",
    "Grid",
    "State",
    "SingularTridiagonalError",
    "build_grid",
    "check_field",
    "dx1",
    "dx2",
    "boundary_dx3",
    "l2_norm",
    "lp_norm",
    "sobolev_norm",
    "tridiag_solve",
    "TridiagFactor",
]

INF = math.inf


class SingularTridiagonalError(RuntimeError):
    """Raised when tridiagonal elimination meets a vanishing pivot."""


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the chemotaxis system plus the far-field states.

    a, b are the diffusivities of the bacteria density u and the chemical
    concentration rho, lam is the chemical decay rate, mu the production
    rate, and kappa the chemotaxis intensity.  The far-field constraint
    |u_pm| < a*lam/(kappa*mu) keeps the effective diffusivity
    f(u) = a - (kappa*mu/lam)*u positive on the range of the wave.
    kappa = 0 is allowed: it decouples the u-equation into pure diffusion
    and is the regime every closed-form oracle lives in.
    """

    a: float
    b: float
    lam: float
    mu: float
    kappa: float
    u_minus: float = 0.0
    u_plus: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "lam", "mu"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.kappa < 0.0:
            raise ValueError("kappa must be non-negative")
        bound = self.degeneracy_bound
        for name in ("u_minus", "u_plus"):
            if not abs(getattr(self, name)) < bound:
                raise ValueError(
                    f"|{name}| = {abs(getattr(self, name)):g} must stay below "
                    f"a*lam/(kappa*mu) = {bound:g} to keep the diffusivity positive"
                )

    @property
    def degeneracy_bound(self) -> float:
        if self.kappa == 0.0:
            return INF
        return self.a * self.lam / (self.kappa * self.mu)

    def f(self, u):
        """Effective diffusivity a - (kappa*mu/lam)*u of the limit equation."""
        return self.a - (self.kappa * self.mu / self.lam) * u

    def df(self) -> float:
        """Derivative of f with respect to u (constant; f is affine)."""
        return -self.kappa * self.mu / self.lam

    @property
    def rho_minus(self) -> float:
        return self.mu / self.lam * self.u_minus

    @property
    def rho_plus(self) -> float:
        return self.mu / self.lam * self.u_plus

    @property
    def delta(self) -> float:
        """Wave strength |rho_+ - rho_-| + |u_+| + |u_-|."""
        return abs(self.rho_plus - self.rho_minus) + abs(self.u_plus) + abs(self.u_minus)


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_i = x0 + i*dx, i = 0..n-1."""

    x0: float
    dx: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not self.dx > 0.0:
            raise ValueError("dx must be positive")

    @property
    def nodes(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def length(self) -> float:
        return self.dx * (self.n - 1)

    @property
    def x_end(self) -> float:
        return self.x0 + self.length


def build_grid(x0: float, length: float, n: int) -> Grid:
    """Uniform grid of n >= 3 nodes spanning [x0, x0 + length]."""
    if n < 3:
        raise ValueError(f"need n >= 3 nodes, got {n}")
    if not length > 0.0:
        raise ValueError(f"length must be positive, got {length}")
    return Grid(x0=float(x0), dx=float(length) / (n - 1), n=int(n))


def check_field(f, grid: Grid) -> np.ndarray:
    """Validate alignment and finiteness; non-finite entries signal blow-up."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError(f"field shape {f.shape} does not match grid ({grid.n},)")
    if not np.all(np.isfinite(f)):
        raise FloatingPointError("field contains non-finite entries")
    return f


@dataclass(frozen=True)
class State:
    """Bacteria density u and chemical concentration rho on one grid at time t."""

    grid: Grid
    u: np.ndarray
    rho: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "u", check_field(self.u, self.grid))
        object.__setattr__(self, "rho", check_field(self.rho, self.grid))
        if self.t < 0.0:
            raise ValueError("time must be non-negative")


def dx1(f, grid: Grid) -> np.ndarray:
    """First derivative: centered interior, 3-point one-sided ends, all O(dx^2).

    The boundary stencils are written in difference form so constants are
    annihilated exactly in floating point.
    """
    f = check_field(f, grid)
    h = grid.dx
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (4.0 * (f[1] - f[0]) + (f[0] - f[2])) / (2.0 * h)
    out[-1] = (4.0 * (f[-1] - f[-2]) + (f[-3] - f[-1])) / (2.0 * h)
    return out


def dx2(f, grid: Grid) -> np.ndarray:
    """Second derivative: 3-point interior, 4-point one-sided ends, all O(dx^2)."""
    f = check_field(f, grid)
    h2 = grid.dx * grid.dx
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    if grid.n < 4:
        # 3-node grid: the centered value is the only O(dx^2) information
        out[0] = out[-1] = out[1]
        return out
    out[0] = (2.0 * (f[0] - f[1]) - 3.0 * (f[1] - f[2]) + (f[2] - f[3])) / h2
    out[-1] = (2.0 * (f[-1] - f[-2]) - 3.0 * (f[-2] - f[-3])
               + (f[-3] - f[-4])) / h2
    return out


def boundary_dx3(f, grid: Grid) -> float:
    """Third derivative at the left boundary node, 5-point one-sided, O(dx^2)."""
    f = check_field(f, grid)
    if grid.n < 5:
        raise ValueError("third-derivative boundary stencil needs n >= 5")
    h3 = grid.dx**3
    return float(
        (-2.5 * (f[0] - f[1]) + 6.5 * (f[1] - f[2]) - 5.5 * (f[2] - f[3])
         + 1.5 * (f[3] - f[4])) / h3
    )


def lp_norm(f, grid: Grid, p) -> float:
    """Discrete L^p norm: trapezoidal quadrature for finite p, max norm for p = inf."""
    f = check_field(f, grid)
    if p == INF or p == "inf":
        return float(np.max(np.abs(f)))
    p = float(p)
    if p < 1.0:
        raise ValueError("p must be >= 1 or inf")
    return float(np.trapezoid(np.abs(f) ** p, dx=grid.dx) ** (1.0 / p))


def l2_norm(f, grid: Grid) -> float:
    """Trapezoidal approximation of (integral of f^2 dx)^(1/2) over the grid span."""
    f = check_field(f, grid)
    return float(math.sqrt(np.trapezoid(f * f, dx=grid.dx)))


def sobolev_norm(f, grid: Grid, m: int) -> float:
    """Discrete H^m norm, m in {0, 1, 2}.

    The second-derivative term uses dx2 directly rather than dx1 twice, so the
    boundary accuracy stays second order; tests rely on the same convention.
    """
    if m not in (0, 1, 2):
        raise ValueError(f"m must be 0, 1, or 2, got {m}")
    total = l2_norm(f, grid) ** 2
    if m >= 1:
        total += l2_norm(dx1(f, grid), grid) ** 2
    if m >= 2:
        total += l2_norm(dx2(f, grid), grid) ** 2
    return math.sqrt(total)


def tridiag_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve A x = rhs for tridiagonal A by Thomas elimination.

    lower and upper are the sub/super-diagonals (length n-1), diag the main
    diagonal (length n).  Intended for diagonally dominant systems; raises
    SingularTridiagonalError when a pivot falls below 1e-14 times the
    coefficient scale.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.size
    if lower.size != n - 1 or upper.size != n - 1 or rhs.size != n:
        raise ValueError("band lengths must be (n-1, n, n-1) with rhs of length n")
    scale = max(
        np.max(np.abs(diag)),
        np.max(np.abs(lower)) if n > 1 else 0.0,
        np.max(np.abs(upper)) if n > 1 else 0.0,
    )
    pivot_floor = 1e-14 * max(scale, 1e-300)

    c = np.empty(n - 1)
    d = np.empty(n)
    piv = diag[0]
    if abs(piv) < pivot_floor:
        raise SingularTridiagonalError("zero pivot at row 0")
    c[0] = upper[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, n - 1):
        piv = diag[i] - lower[i - 1] * c[i - 1]
        if abs(piv) < pivot_floor:
            raise SingularTridiagonalError(f"near-singular pivot at row {i}")
        c[i] = upper[i] / piv
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv
    piv = diag[n - 1] - lower[n - 2] * c[n - 2]
    if abs(piv) < pivot_floor:
        raise SingularTridiagonalError(f"near-singular pivot at row {n - 1}")
    d[n - 1] = (rhs[n - 1] - lower[n - 2] * d[n - 2]) / piv

    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


class TridiagFactor:
    """LU-prefactored tridiagonal matrix for repeated solves with fixed coefficients.

    The time stepper solves the same two matrices thousands of times per run,
    so the O(n) factorization is done once here (LAPACK gttrf) and each step
    only pays for the substitution sweeps (gttrs).
    """

    def __init__(self, lower, diag, upper):
        lower = np.ascontiguousarray(lower, dtype=float)
        diag = np.ascontiguousarray(diag, dtype=float)
        upper = np.ascontiguousarray(upper, dtype=float)
        if lower.size != diag.size - 1 or upper.size != diag.size - 1:
            raise ValueError("band lengths must be (n-1, n, n-1)")
        dl, d, du, du2, ipiv, info = lapack.dgttrf(lower, diag, upper)
        if info != 0:
            raise SingularTridiagonalError(f"factorization failed with info={info}")
        self._fact = (dl, d, du, du2, ipiv)
        self.n = diag.size

    def solve(self, rhs) -> np.ndarray:
        rhs = np.ascontiguousarray(rhs, dtype=float)
        if rhs.size != self.n:
            raise ValueError("rhs length does not match the factored matrix")
        x, info = lapack.dgttrs(*self._fact, rhs)
        if info != 0:
            raise SingularTridiagonalError(f"substitution failed with info={info}")
        return x
