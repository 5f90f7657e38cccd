"""Dispersion-targeted interior stencils from convex-combination families.

A family is spanned by consistent upwind rows of orders a..b; a member is
sum_i gamma_i basis_i with sum gamma_i = 1, and its squared dispersion
relation omega_N^2 is a quadratic form in gamma over exact cosine
coefficients (the Gram tensor).  Optimization minimizes the weighted
coefficient-space distance to the Fourier cosine series of omega^2 = k^2,
by Gauss-Newton descent on the affine set, seeded by a convex relaxation
plus the family vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import dispersion as _dsp
from .numkernel import Rational
from .operators import InteriorStencil, build_upwind_interior

__all__ = [
    "FamilySpec",
    "GramTensor",
    "TargetCoefficients",
    "OptimizerResult",
    "build_family",
    "target_coeffs",
    "weight_matrix",
    "objective",
    "RelaxationSeed",
    "solve_relaxation",
    "optimize",
    "weighted_variant",
    "toy_example",
    "pi_mode_relative_error",
]

WeightSpec = Union[str, Sequence[float], Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class FamilySpec:
    a: int
    b: int
    j_max: int = 24
    weight: WeightSpec = "uniform"

    def __post_init__(self):
        if not (2 <= self.a <= self.b <= 9):
            raise ValueError(f"family orders must satisfy 2 <= a <= b <= 9, "
                             f"got ({self.a}, {self.b})")


@dataclass(frozen=True)
class GramTensor:
    """Exact cosine coefficients of the symmetrized symbol products.

    entries[i][j][l] is the coefficient of cos(lk) in
    Re(w+_i(k) * conj(w+_j(k))), padded with zeros up to j_max.
    """

    orders: tuple
    j_max: int
    entries: tuple     # N x N x (j_max+1) nested tuples of Fraction

    def as_array(self) -> np.ndarray:
        N = len(self.orders)
        C = np.zeros((N, N, self.j_max + 1))
        for i in range(N):
            for j in range(N):
                for l, v in enumerate(self.entries[i][j]):
                    C[i, j, l] = float(v)
        return C


@dataclass(frozen=True)
class TargetCoefficients:
    """Cosine series of omega^2 = k^2 on [-pi, pi], truncated at j_max."""

    j_max: int
    beta: np.ndarray   # beta_0 = pi^2/3, beta_i = 4(-1)^i / i^2

    @staticmethod
    def tail_bound(j_max: int) -> float:
        # sum_{l > j} beta_l^2 <= 16 sum 1/l^4 <= 16 / (3 j^3)
        return 16.0 / (3.0 * j_max ** 3)


@dataclass
class OptimizerResult:
    gamma: np.ndarray
    orders: tuple
    stencil: InteriorStencil
    objective: float
    eps_inf: float
    multistart_log: list
    rationalized: bool
    relaxation_fallback: bool


def _symbol_coeff_map(st: InteriorStencil) -> dict:
    return {l: Fraction(c) for c, l in zip(st.coeffs, st.offsets)}


def build_family(spec: FamilySpec):
    """(basis stencils, GramTensor) for upwind orders a..b.

    Each symmetrized product (w+_i conj(w+_j) + w+_j conj(w+_i)) / 2 must be
    a pure cosine polynomial; the sine residual is accumulated exactly in
    rationals and any nonzero entry is an error.
    """
    basis = [build_upwind_interior(o) for o in range(spec.a, spec.b + 1)]
    reach = max(max(b.r1, b.r2) for b in basis)
    if spec.j_max < 2 * reach:
        raise ValueError(f"j_max = {spec.j_max} < 2 x stencil reach {reach}")
    maps = [_symbol_coeff_map(b) for b in basis]
    N = len(basis)
    entries = []
    for i in range(N):
        row = []
        for j in range(N):
            c = [Fraction(0)] * (spec.j_max + 1)
            for l, al in maps[i].items():
                for m, bm in maps[j].items():
                    c[abs(l - m)] += al * bm
            # the symmetrization (i,j)+(j,i) must cancel all sine terms
            full_sin = {}
            for l, al in maps[i].items():
                for m, bm in maps[j].items():
                    d = l - m
                    if d != 0:
                        full_sin[abs(d)] = full_sin.get(abs(d), Fraction(0)) \
                            + al * bm * (1 if d > 0 else -1)
            for l, al in maps[j].items():
                for m, bm in maps[i].items():
                    d = l - m
                    if d != 0:
                        full_sin[abs(d)] = full_sin.get(abs(d), Fraction(0)) \
                            + al * bm * (1 if d > 0 else -1)
            if any(v != 0 for v in full_sin.values()):
                raise ArithmeticError(
                    f"symmetrized product of orders {basis[i].declared_order} "
                    f"and {basis[j].declared_order} is not pure cosine")
            row.append(tuple(c))
        entries.append(tuple(row))
    gram = GramTensor(tuple(b.declared_order for b in basis), spec.j_max,
                      tuple(entries))
    return basis, gram


def target_coeffs(j_max: int) -> TargetCoefficients:
    beta = np.array([math.pi ** 2 / 3.0]
                    + [4.0 * (-1) ** i / i ** 2 for i in range(1, j_max + 1)])
    return TargetCoefficients(j_max, beta)


def _resolve_rho(weight: WeightSpec):
    """Turn a weight spec into a callable rho(k) or None for uniform."""
    if weight is None or (isinstance(weight, str) and weight == "uniform"):
        return None
    if callable(weight):
        return weight
    if isinstance(weight, str):
        kind, _, arg = weight.partition(":")
        if kind == "expquad":
            c = float(arg) if arg else 0.3
            return lambda k: np.exp(c * k * k)
        if kind == "indicator":
            kp = float(arg) if arg else math.pi
            return lambda k: (np.abs(k) <= kp).astype(float)
        raise ValueError(f"unknown weight spec {weight!r}")
    coeffs = np.asarray(weight, dtype=float)
    return lambda k: sum(c * np.cos(l * k) for l, c in enumerate(coeffs))


def weight_matrix(j_max: int, weight: WeightSpec) -> np.ndarray:
    """SPD weight for the coefficient residual: the Gram matrix of rho in
    the orthonormalized cosine basis on [-pi, pi].

    rho is first projected onto cosines up to j_max; the truncated
    reconstruction must stay positive (a weight that dips below zero does
    not induce an inner product and is rejected).  rho = 1 gives exactly
    the identity, reducing the objective to plain least squares.
    """
    rho = _resolve_rho(weight)
    if rho is None:
        return np.eye(j_max + 1)
    from scipy.integrate import simpson
    kk = np.linspace(-math.pi, math.pi, 20001)
    r = np.asarray(rho(kk), dtype=float)
    if np.any(r < 0):
        raise ValueError("weight function rho must be nonnegative")
    # project to cosine coefficients, then work with the projection
    rho_hat = np.empty(j_max + 1)
    rho_hat[0] = simpson(r, x=kk) / (2 * math.pi)
    for l in range(1, j_max + 1):
        rho_hat[l] = simpson(r * np.cos(l * kk), x=kk) / math.pi
    r_proj = sum(c * np.cos(l * kk) for l, c in enumerate(rho_hat))
    if r_proj.min() < -1e-10 * max(1.0, np.abs(r_proj).max()):
        raise ValueError(
            f"projected weight dips to {r_proj.min():.3e} < 0 at "
            f"k = {kk[np.argmin(r_proj)]:.3f}; it does not induce an inner "
            f"product at j_max = {j_max}")
    norm = [math.sqrt(2 * math.pi)] + [math.sqrt(math.pi)] * j_max
    M = np.zeros((j_max + 1, j_max + 1))
    for l in range(j_max + 1):
        bl = np.cos(l * kk) / norm[l]
        for m in range(l, j_max + 1):
            bm = np.cos(m * kk) / norm[m]
            M[l, m] = M[m, l] = simpson(bl * bm * r_proj, x=kk)
    return 0.5 * (M + M.T)


def _model_coeffs(C: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    return np.einsum("ijl,i,j->l", C, gamma, gamma)


def objective(gamma, gram: GramTensor, target: TargetCoefficients,
              weight: Optional[np.ndarray] = None) -> float:
    """Weighted squared coefficient distance of the family member to k^2."""
    C = gram.as_array() if isinstance(gram, GramTensor) else np.asarray(gram)
    gamma = np.asarray(gamma, dtype=float)
    d = _model_coeffs(C, gamma) - target.beta
    if weight is None:
        return float(d @ d)
    W = np.asarray(weight, dtype=float)
    if W.ndim == 1:
        return float(d @ (W * d))
    return float(d @ W @ d)


class RelaxationSeed(NamedTuple):
    gamma: Optional[np.ndarray]  # None when rank-one extraction degenerates
    fallback: bool
    pi_matrix: np.ndarray
    value: float                 # relaxed minimum, lower bound interest only


def solve_relaxation(gram: GramTensor, target: TargetCoefficients,
                     weight: Optional[np.ndarray] = None) -> RelaxationSeed:
    """Convex surrogate seed: free symmetric pi with the sum coupling.

    The products gamma_i gamma_j are replaced by free symmetric variables
    pi_{ij} whose multiplicity-weighted sum is pinned to 1 (the image of
    sum gamma = 1).  The quadratic is solved in closed form and gamma is
    seeded by the leading eigenvector of pi scaled to sum 1; a degenerate
    extraction falls back to the uniform seed with a flag.
    """
    C = gram.as_array() if isinstance(gram, GramTensor) else np.asarray(gram)
    N = C.shape[0]
    L = C.shape[2]
    W = np.eye(L) if weight is None else np.asarray(weight, dtype=float)
    if W.ndim == 1:
        W = np.diag(W)
    idx = [(i, j) for i in range(N) for j in range(i, N)]
    A = np.zeros((L, len(idx)))
    for t, (i, j) in enumerate(idx):
        A[:, t] = C[i, j] if i == j else 2.0 * C[i, j]
    csum = np.array([1.0 if i == j else 2.0 for (i, j) in idx])
    H = A.T @ W @ A
    f = A.T @ W @ target.beta
    KKT = np.block([[2 * H, csum[:, None]], [csum[None, :], np.zeros((1, 1))]])
    rhs = np.concatenate([2 * f, [1.0]])
    sol = np.linalg.lstsq(KKT, rhs, rcond=None)[0][:len(idx)]
    P = np.zeros((N, N))
    for t, (i, j) in enumerate(idx):
        P[i, j] = P[j, i] = sol[t]
    resid = A @ sol - target.beta
    value = float(resid @ W @ resid)
    ev, V = np.linalg.eigh(P)
    if ev[-1] <= 0:
        return RelaxationSeed(None, True, P, value)
    u = V[:, -1]
    if abs(u.sum()) < 1e-8:
        return RelaxationSeed(None, True, P, value)
    return RelaxationSeed(u / u.sum(), False, P, value)


def _gn_minimize(C, beta, g0, W, iters=500, tol=1e-12):
    """Damped Gauss-Newton on the affine set sum(gamma) = 1."""
    N = C.shape[0]

    def fval(g):
        d = _model_coeffs(C, g) - beta
        return float(d @ W @ d)

    g = np.asarray(g0, dtype=float)
    prev = fval(g)
    if N == 1:
        return g, prev
    Z = np.linalg.svd(np.ones((1, N)))[2][1:].T  # basis of sum-zero directions
    Lw = np.linalg.cholesky(W + 1e-15 * np.eye(len(beta)))
    lam = 1e-8
    for _ in range(iters):
        d = _model_coeffs(C, g) - beta
        J = 2.0 * np.einsum("ijl,j->li", C, g)
        r = Lw.T @ d
        Jr = (Lw.T @ J) @ Z
        accepted = False
        g_new, f_new = g, prev
        for _ in range(60):
            try:
                step = np.linalg.solve(Jr.T @ Jr + lam * np.eye(N - 1),
                                       -Jr.T @ r)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            cand = g + Z @ step
            cv = fval(cand)
            if cv <= prev:
                accepted, g_new, f_new = True, cand, cv
                break
            lam *= 10
        if not accepted:
            break
        lam = max(lam * 0.3, 1e-12)
        done = prev - f_new < tol * max(prev, 1e-30)
        g, prev = g_new, f_new
        if done:
            break
    return g, prev


def _combine(basis, gamma):
    """sum_i gamma_i basis_i as an InteriorStencil (exact when gamma is)."""
    exact = all(isinstance(v, Fraction) for v in gamma)
    r1 = max(b.r1 for b in basis)
    r2 = max(b.r2 for b in basis)
    acc = {o: (Fraction(0) if exact else 0.0) for o in range(-r1, r2 + 1)}
    for g, b in zip(gamma, basis):
        for c, o in zip(b.coeffs, b.offsets):
            acc[o] = acc[o] + (g * Fraction(c) if exact else float(g) * float(c))
    coeffs = tuple(Rational(acc[o]) if exact else acc[o]
                   for o in range(-r1, r2 + 1))
    order = min(b.declared_order for b in basis)
    return InteriorStencil(r1, r2, coeffs, order, family="drp")


def _rationalize(gamma: np.ndarray):
    """Snap gamma to denominators <= 1e6 when that stays within 1e-9."""
    rat = [Fraction(float(g)).limit_denominator(10 ** 6) for g in gamma]
    if max(abs(float(r) - g) for r, g in zip(rat, gamma)) > 1e-9:
        return None
    total = sum(rat, Fraction(0))
    if total == 0:
        return None
    return [r / total for r in rat]


def optimize(spec: FamilySpec) -> OptimizerResult:
    """Best family member by multistart Gauss-Newton descent.

    Starts: the relaxation seed, every basis vertex, and the uniform
    combination.  Deterministic given the spec.  The winning stencil's
    eps_inf is recomputed independently by the dispersion module.
    """
    basis, gram = build_family(spec)
    target = target_coeffs(spec.j_max)
    W = weight_matrix(spec.j_max, spec.weight)
    C = gram.as_array()
    N = len(basis)
    starts = [("uniform", np.full(N, 1.0 / N))]
    relax = solve_relaxation(gram, target, W)
    fallback = relax.fallback
    if relax.gamma is not None:
        starts.append(("relaxation", relax.gamma))
    for i in range(N):
        e = np.zeros(N)
        e[i] = 1.0
        starts.append((f"vertex-{gram.orders[i]}", e))
    log = []
    best = None
    for name, g0 in starts:
        g, val = _gn_minimize(C, target.beta, g0, W)
        log.append((name, float(val), g.copy()))
        if best is None or val < best[1]:
            best = (g, val)
    if best is None:
        raise RuntimeError(f"all starts diverged; log: {log}")
    gamma, val = best
    rat = _rationalize(gamma)
    if rat is not None:
        stencil = _combine(basis, rat)
        rationalized = stencil.is_consistent()
    else:
        stencil = _combine(basis, gamma)
        rationalized = False
    rep = _dsp.error_report(_dsp.dispersion_upwind(
        stencil, label=f"family({spec.a},{spec.b})"))
    return OptimizerResult(gamma, gram.orders, stencil, float(val),
                           rep.eps_inf, log, rationalized, fallback)


def weighted_variant(spec: FamilySpec) -> OptimizerResult:
    """optimize() with a validated non-uniform weight (plain wrapper)."""
    return optimize(spec)


def pi_mode_relative_error(stencil: InteriorStencil) -> float:
    """|omega_N(pi) - pi| / pi for the stencil's dispersion relation."""
    curve = _dsp.dispersion_upwind(stencil, n_samples=3)
    return float(abs(curve.omega_at(np.array([math.pi]))[0] - math.pi) / math.pi)


def toy_example():
    """Two-parameter sanity problem with two known minimizers.

    Cost (p11 - 1)^2 + p12^2 + (p22 - 1)^2 on the curve
    (p11, p12, p22) = (g1^2, g1 g2, g2^2), sum g = 1: minimum value 1,
    attained at g = (1, 0) and g = (0, 1).  Returns the multistart results.
    """
    C = np.zeros((2, 2, 3))
    C[0, 0, 0] = 1.0          # model_0 = g1^2
    C[0, 1, 1] = C[1, 0, 1] = 0.5   # model_1 = g1 g2
    C[1, 1, 2] = 1.0          # model_2 = g2^2
    beta = np.array([1.0, 0.0, 1.0])
    target = TargetCoefficients(2, beta)
    W = np.eye(3)
    gram_like = C
    seeds = [("uniform", np.array([0.5, 0.5])),
             ("vertex-0", np.array([1.0, 0.0])),
             ("vertex-1", np.array([0.0, 1.0]))]
    relax = solve_relaxation(gram_like, target, W)
    if relax.gamma is not None:
        seeds.insert(1, ("relaxation", relax.gamma))
    out = []
    for name, g0 in seeds:
        g, val = _gn_minimize(C, beta, g0, W)
        out.append((name, g, float(val)))
    return out
