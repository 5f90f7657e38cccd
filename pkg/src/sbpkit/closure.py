"""Boundary closures for dual-pairing operators by three-set ADMM.

Given an interior band, the unknowns are the s x s corner block of
Qb = Q+ - B/2 together with the s boundary quadrature weights.  The three
convex requirements -- the affine accuracy system (with weight floors),
the pinning set fixing every matrix entry outside the corners to the band,
and the negative-semidefinite cone of the symmetric part -- are reconciled
by a scaled consensus ADMM whose objective is a ridge-regularized
truncation-error cost.

On the accuracy set the symmetric part annihilates monomials up to the
boundary degree exactly, so the semidefinite projection is performed in
the orthogonal complement of those directions (an exact deflation; the
full symmetric part then has those eigenvalues pinned at zero).  Near the
cone boundary the plain iteration crawls; a stalled run is polished by an
interior-point / semismooth-Newton stage (see _refine) whose primal-dual
pair re-seeds the iteration, and the final residuals reported are always
genuine ADMM steps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .operators import BoundaryClosure, DualPairOperator, InteriorStencil

__all__ = [
    "AccuracySystem",
    "AdmmState",
    "ClosureProblem",
    "ClosureResult",
    "admm_solve",
    "band_symmetric_coeffs",
    "build_problem",
    "symmetric_part",
    "theta_subproblem",
    "write_convergence_csv",
]

SOLVED_PRECISION = 1e-9      # accuracy-residual level of float solves
STALL_MIN_ITER = 400         # earliest iteration for a refinement attempt
STALL_WINDOW = 250           # lookback for the progress test
STALL_FACTOR = 2.0           # required improvement over the window


def band_symmetric_coeffs(interior: InteriorStencil) -> dict:
    """Exact band of (Qb^T + Qb)/2 away from the corners: s_k = (a_k + a_-k)/2."""
    a = dict(zip(interior.offsets, (Fraction(c) for c in interior.coeffs)))
    reach = max(interior.r1, interior.r2)
    out = {}
    for k in range(reach + 1):
        out[k] = (a.get(k, Fraction(0)) + a.get(-k, Fraction(0))) / 2
    return out


def _rational_rank(rows) -> int:
    """Rank of a matrix of Fractions by exact Gauss-Jordan elimination."""
    M = [list(r) for r in rows]
    nrow = len(M)
    ncol = len(M[0]) if nrow else 0
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, nrow) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [v / pv for v in M[r]]
        for i in range(nrow):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == nrow:
            break
    return r


@dataclass(frozen=True)
class AccuracySystem:
    """Joint monomial-exactness rows, linear in (q-block, weights).

    Each equality row reads sum_j Q[i,j] x_j^m - h_i m x_i^(m-1) = rhs with
    the rhs collecting fixed band contributions; rows cover m = 0..degree
    for every boundary row of both members of the pair.  a_ineq selects the
    weight entries (the floors h_i >= eps2).
    """

    a_eq: np.ndarray
    rhs: np.ndarray
    a_ineq: np.ndarray
    degree: int
    requested_degree: int


class _CertifiedQP:
    """min 0.5 x'P x - r'x  s.t.  C x >= d, P positive definite.

    Enumerates candidate active sets (independent row subsets of C),
    certifying by primal feasibility plus dual nonnegativity; the winning
    set is cached as a warm start since consecutive ADMM subproblems
    rarely change face.
    """

    def __init__(self, P, C, d, feas_tol=1e-9):
        self.P, self.C, self.d = P, C, d
        self.tol = feas_tol
        try:
            self.Pc = sla.cho_factor(P)
        except sla.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"theta subproblem KKT is singular: {exc}") from exc
        nc = C.shape[0]
        rmax = np.linalg.matrix_rank(C, tol=1e-10) if nc else 0
        self.cands = [()]
        for k in range(1, rmax + 1):
            for w in combinations(range(nc), k):
                if np.linalg.matrix_rank(C[list(w)], tol=1e-10) == k:
                    self.cands.append(w)
        self.fact = {}
        self.last = ()

    def _factor(self, w):
        if w not in self.fact:
            if not w:
                self.fact[w] = None
            else:
                Cw = self.C[list(w)]
                K = np.block([[self.P, -Cw.T],
                              [Cw, np.zeros((len(w), len(w)))]])
                self.fact[w] = sla.lu_factor(K)
        return self.fact[w]

    def _try(self, w, r):
        nz = self.P.shape[0]
        if not w:
            xi = sla.cho_solve(self.Pc, r)
            mu = np.zeros(0)
        else:
            sol = sla.lu_solve(self._factor(w), np.r_[r, self.d[list(w)]])
            xi, mu = sol[:nz], sol[nz:]
        scale = 1 + np.abs(self.d).max() if self.d.size else 1.0
        if mu.size and mu.min() < -self.tol * scale:
            return None
        if self.C.shape[0]:
            if (self.C @ xi - self.d).min() < -self.tol * scale:
                return None
        return xi

    def solve(self, r):
        xi = self._try(self.last, r)
        if xi is not None:
            return xi
        for w in self.cands:
            if w == self.last:
                continue
            xi = self._try(w, r)
            if xi is not None:
                self.last = w
                return xi
        raise np.linalg.LinAlgError(
            "theta subproblem: no certified active set (infeasible or "
            "degenerate weight floors)")


class ClosureProblem:
    """Assembled data for one boundary-closure solve.

    The parameter vector stacks the s*s corner entries of Qb (row-major)
    and then the s boundary weights.  Derived operators over it:

    - ``accuracy``: joint monomial rows for both pair members (a_eq th = rhs),
      at the largest consistent degree <= the requested one;
    - ``Ct, ct``: unit-normalized leading truncation-error rows (the ridge
      cost is |Ct th - ct|^2 + lam_c |th|^2 + h_weight (h_1 - h_target)^2);
    - ``S0, Smat``: affine map of the full symmetric part, with ``maskf``
      marking the consensus-free corner entries;
    - ``W, Y0, Ymat``: the deflation Y = W' S W onto the complement of the
      monomial directions that S annihilates on the accuracy set;
    - ``th_p, Z``: particular solution and orthonormal null basis of the
      accuracy equalities, so th = th_p + Z' xi stays feasible exactly.
    """

    def __init__(self, interior: InteriorStencil, s: int, boundary_order: int,
                 *, eps1: float = 0.0, eps2: float = 0.25, lam_c: float = 1e-6,
                 t: float = 1.0, tol: float = 1e-9, max_iter: int = 5000,
                 h_target: Optional[float] = 0.3, h_weight: float = 1.0,
                 known: Optional[dict] = None):
        if eps1 < 0 or eps2 <= 0 or t <= 0:
            raise ValueError("require eps1 >= 0, eps2 > 0, t > 0")
        if boundary_order < 0:
            raise ValueError("boundary_order must be nonnegative")
        r1, r2 = interior.r1, interior.r2
        if s < max(r1, r2):
            raise ValueError(
                f"block size s = {s} < max(r1, r2) = {max(r1, r2)}: the "
                f"interior band would be truncated against the mirrored block")
        self.interior = interior
        self.band = dict(zip(interior.offsets,
                             (Fraction(c) for c in interior.coeffs)))
        self.r1, self.r2, self.s = r1, r2, s
        self.n = 2 * s + r1 + r2 + 1
        self.npar = s * s + s
        self.eps1, self.eps2 = float(eps1), float(eps2)
        self.lam_c, self.t = float(lam_c), float(t)
        self.tol, self.max_iter = float(tol), int(max_iter)
        self.h_target = None if h_target is None else float(h_target)
        self.h_weight = float(h_weight) if h_target is not None else 0.0
        self.known = dict(known or {})
        self._build_accuracy(boundary_order)
        self._build_cost()
        self._build_maps()

    # -- exact row generation ------------------------------------------------

    def _qb_entry(self, i, j):
        """Entry (i, j) of Qb as (theta-coefficient dict, constant)."""
        s, n = self.s, self.n
        if i < s and j < s:
            return {i * s + j: Fraction(1)}, Fraction(0)
        if i >= n - s and j >= n - s:
            return {(n - 1 - j) * s + (n - 1 - i): Fraction(1)}, Fraction(0)
        return {}, self.band.get(j - i, Fraction(0))

    def _pair_rows(self, m, centered):
        """Exact rows of degree m for rows 0..s-1 of Q+ and of Q- = B - Q+^T.

        centered=False: monomial-exactness rows (x^m against h_i m x_i^(m-1));
        centered=True: leading truncation rows sum_j Q[i,j] (x_j - x_i)^m,
        whose weight term vanishes for m >= 2.
        """
        s, n = self.s, self.n
        rows, rhs = [], []
        for i in range(s):
            for member in ("plus", "minus"):
                coeffs = {}
                const = Fraction(0)
                for j in range(n):
                    xjm = (Fraction(j) - Fraction(i)) ** m if centered \
                        else Fraction(j) ** m
                    if xjm == 0:
                        continue
                    if member == "plus":
                        d, c = self._qb_entry(i, j)
                        if i == 0 and j == 0:
                            c -= Fraction(1, 2)
                    else:
                        d, c = self._qb_entry(j, i)
                        d = {k: -v for k, v in d.items()}
                        c = -c
                        if i == 0 and j == 0:
                            c -= Fraction(1, 2)
                    for k, v in d.items():
                        coeffs[k] = coeffs.get(k, Fraction(0)) + v * xjm
                    const += c * xjm
                if (centered and m == 1) or (not centered and m >= 1):
                    dx = Fraction(1) if centered else Fraction(m) * Fraction(i) ** (m - 1)
                    k = s * s + i
                    coeffs[k] = coeffs.get(k, Fraction(0)) - dx
                row = [Fraction(0)] * self.npar
                for k, v in coeffs.items():
                    row[k] = v
                rows.append(row)
                rhs.append(-const)
        return rows, rhs

    def _build_accuracy(self, requested):
        rows_by_deg = {m: self._pair_rows(m, centered=False)
                       for m in range(requested + 1)}
        deg = requested
        rows = rhs = None
        while deg >= 0:
            rows, rhs = [], []
            for m in range(deg + 1):
                a, b = rows_by_deg[m]
                rows += a
                rhs += b
            r_a = _rational_rank(rows)
            r_ab = _rational_rank([r + [b] for r, b in zip(rows, rhs)])
            if r_a == r_ab:
                break
            deg -= 1
        if deg < 0:
            raise ValueError(
                "accuracy system inconsistent even at degree 0; the interior "
                "band cannot be closed on this block")
        self.boundary_order = deg
        A = np.array([[float(v) for v in r] for r in rows])
        b = np.array([float(v) for v in rhs])
        # keep a well-conditioned independent subset of the rows
        _, R, piv = sla.qr((A / np.linalg.norm(A, axis=1)[:, None]).T,
                           pivoting=True, mode="economic")
        diag = np.abs(np.diag(R))
        rank = int((diag > 1e-11 * diag[0]).sum())
        if rank != _rational_rank(rows):
            raise ArithmeticError(
                "float rank of the accuracy rows disagrees with the exact rank")
        a_ineq = np.zeros((self.s, self.npar))
        for i in range(self.s):
            a_ineq[i, self.s * self.s + i] = 1.0
        self.accuracy = AccuracySystem(A[piv[:rank]], b[piv[:rank]], a_ineq,
                                       deg, requested)

    def _build_cost(self):
        rows, rhs = self._pair_rows(self.boundary_order + 1, centered=True)
        Ct = np.array([[float(v) for v in r] for r in rows])
        ct = -np.array([float(v) for v in rhs])
        norms = np.linalg.norm(np.hstack([Ct, ct[:, None]]), axis=1)
        norms[norms == 0] = 1.0
        self.Ct = Ct / norms[:, None]
        self.ct = ct / norms

    # -- affine maps and deflation --------------------------------------------

    def _qbar(self, theta, n=None):
        n = n or self.n
        s = self.s
        M = np.zeros((n, n))
        for off, v in self.band.items():
            fv = float(v)
            for i in range(max(0, -off), min(n, n - off)):
                j = i + off
                if i < s and j < s:
                    continue
                if i >= n - s and j >= n - s:
                    continue
                M[i, j] = fv
        q = np.asarray(theta[:s * s], dtype=float).reshape(s, s)
        M[:s, :s] = q
        M[n - s:, n - s:] = q[::-1, ::-1].T
        return M

    def _build_maps(self):
        n, s, npar = self.n, self.s, self.npar
        S0 = symmetric_part(np.zeros(npar), self).ravel()
        Smat = np.zeros((n * n, npar))
        for p in range(s * s):
            e = np.zeros(npar)
            e[p] = 1.0
            Smat[:, p] = symmetric_part(e, self).ravel() - S0
        mask = np.zeros((n, n), bool)
        mask[:s, :s] = True
        mask[n - s:, n - s:] = True
        for (i, j), value in self.known.items():
            if not (0 <= i < s and 0 <= j < s):
                raise ValueError(f"known entry {(i, j)} outside the corner block")
            v = float(value)
            for a, b in ((i, j), (j, i), (n - 1 - j, n - 1 - i),
                         (n - 1 - i, n - 1 - j)):
                mask[a, b] = False
                S0[a * n + b] = v
        self.S0, self.Smat, self.maskf = S0, Smat, mask.ravel()
        # deflation basis: S(theta) x^m = 0 for m <= degree on the accuracy set
        deg = self.boundary_order
        x = np.arange(n, dtype=float)
        c = 0.5 * (n - 1)
        K = np.array([((x - c) / (n / 2.0)) ** m for m in range(deg + 1)]).T
        Qk, _ = np.linalg.qr(K)
        U, _, _ = np.linalg.svd(np.eye(n) - Qk @ Qk.T)
        W = U[:, :n - (deg + 1)]
        self.W = W
        self.nw = W.shape[1]
        self.Y0 = (W.T @ S0.reshape(n, n) @ W).ravel()
        Ymat = np.zeros((self.nw * self.nw, npar))
        for p in range(s * s):
            Sp = Smat[:, p].reshape(n, n)
            Ymat[:, p] = (W.T @ Sp @ W).ravel()
        self.Ymat = Ymat
        # exact elimination of the equalities: th = th_p + Z' xi
        A, b = self.accuracy.a_eq, self.accuracy.rhs
        norms = np.linalg.norm(A, axis=1)
        Ua, sva, Vta = np.linalg.svd(A / norms[:, None])
        rank = int((sva > 1e-11 * sva[0]).sum())
        self.th_p = Vta[:rank].T @ ((Ua[:, :rank].T @ (b / norms)) / sva[:rank])
        if np.linalg.norm(A @ self.th_p - b) > 1e-9 * (1 + np.linalg.norm(b)):
            raise ArithmeticError("particular accuracy solution is inaccurate")
        self.Z = Vta[rank:]
        # fixed pieces of the theta subproblem
        eh = np.zeros(npar)
        eh[s * s] = 1.0
        sct = np.sqrt(2.0 / self.t)
        anchor = self.h_target if self.h_target is not None else 0.0
        G_cost = np.vstack([self.Ct, np.sqrt(self.lam_c) * np.eye(npar),
                            np.sqrt(self.h_weight) * eh[None, :]])
        self.g_cost = np.concatenate([self.ct, np.zeros(npar),
                                      [np.sqrt(self.h_weight) * anchor]])
        self._sct = sct
        G = np.vstack([sct * G_cost, self.Ymat, self.Smat])
        self.GZ = G @ self.Z.T
        self.Gp = G @ self.th_p
        self._qp = _CertifiedQP(2 * self.GZ.T @ self.GZ,
                                self.Z.T[s * s:, :],
                                self.eps2 - self.th_p[s * s:])

    # -- conveniences ----------------------------------------------------------

    @property
    def free_parameter_count(self) -> int:
        return self.npar - len(self.known)

    def accuracy_residual(self, theta) -> float:
        return float(np.abs(self.accuracy.a_eq @ theta - self.accuracy.rhs).max())

    def cost(self, theta) -> float:
        r = self.Ct @ theta - self.ct
        v = float(r @ r + self.lam_c * (theta @ theta))
        if self.h_target is not None:
            v += self.h_weight * (theta[self.s * self.s] - self.h_target) ** 2
        return v

    def closure_from_theta(self, theta,
                           precision: float = SOLVED_PRECISION) -> BoundaryClosure:
        """Package a parameter vector as a closure (corner + band tail).

        Entries are carried over exactly (floats are binary rationals), so
        the assembled pair satisfies the summation-by-parts identity with
        residual exactly zero while monomial accuracy holds to the float
        level recorded in ``precision``.
        """
        s, r2 = self.s, self.r2
        q = np.zeros((s, s + r2))
        q[:, :s] = np.asarray(theta[:s * s], dtype=float).reshape(s, s)
        q_exact = []
        for i in range(s):
            row = [Fraction(float(v)) for v in q[i, :s]]
            for j in range(s, s + r2):
                v = self.band.get(j - i, Fraction(0))
                q[i, j] = float(v)
                row.append(Fraction(v))
            q_exact.append(tuple(row))
        h = np.asarray(theta[s * s:], dtype=float)
        return BoundaryClosure(s, q, h, q_exact=tuple(q_exact),
                               precision=precision)


def build_problem(interior: InteriorStencil, s: int, boundary_order: int,
                  **hyper) -> ClosureProblem:
    """Set up a closure solve; see ClosureProblem for the derived fields.

    Raises ValueError when s < max(r1, r2) (band truncation) or when no
    boundary degree >= 0 is consistent.  If the requested degree is
    infeasible the largest consistent one is used and recorded in
    ``problem.boundary_order``.
    """
    return ClosureProblem(interior, s, boundary_order, **hyper)


def symmetric_part(theta, problem: ClosureProblem) -> np.ndarray:
    """S(theta) = (Qb + Qb^T)/2 over the problem's own grid size."""
    M = problem._qbar(np.asarray(theta, dtype=float))
    return 0.5 * (M + M.T)


@dataclass
class AdmmState:
    """Mutable iteration state of the three-set splitting.

    theta_dprime is the cone-projected copy in the deflated coordinates
    (nw x nw, raveled); theta_prime is the pinned copy in the full matrix
    coordinates (n x n, raveled); lam1/lam2 are the matching dual blocks.
    """

    theta: np.ndarray
    theta_prime: np.ndarray
    theta_dprime: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    iteration: int = 0
    history: list = field(default_factory=list)


def _fresh_state(problem: ClosureProblem) -> AdmmState:
    theta = np.zeros(problem.npar)
    Sth = problem.S0 + problem.Smat @ theta
    Yth = problem.Y0 + problem.Ymat @ theta
    return AdmmState(theta=theta, theta_prime=Sth.copy(),
                     theta_dprime=Yth.copy(),
                     lam1=np.zeros(problem.nw * problem.nw),
                     lam2=np.zeros(problem.n * problem.n))


def theta_subproblem(state: AdmmState, problem: ClosureProblem) -> np.ndarray:
    """Argmin of (2/t) cost + |S(th)-th'-lam2/t|^2 + |Y(th)-th''-lam1/t|^2
    over the accuracy set, weight floors enforced by certified active sets.

    The equalities hold exactly by the null-space parametrization; raises
    numpy.linalg.LinAlgError when the reduced KKT system is singular.
    """
    t = problem.t
    g = np.concatenate([problem._sct * problem.g_cost,
                        state.theta_dprime + state.lam1 / t - problem.Y0,
                        state.theta_prime + state.lam2 / t - problem.S0])
    xi = problem._qp.solve(2 * problem.GZ.T @ (g - problem.Gp))
    return problem.th_p + problem.Z.T @ xi


@dataclass
class ClosureResult:
    """Outcome of admm_solve: closure plus convergence bookkeeping."""

    problem: ClosureProblem
    closure: BoundaryClosure
    theta: np.ndarray
    converged: bool
    iterations: int
    residual: float
    history: np.ndarray            # per-iteration combined residual
    monotone: bool                 # decreasing over every 50-iteration window
    refined: bool                  # polish stage was engaged
    log: list                      # (iter, primal, dual, lmax_S, acc_resid)

    def as_operator(self, name: str = "solved") -> DualPairOperator:
        meta = {"converged": self.converged, "iterations": self.iterations,
                "residual": self.residual,
                "boundary_order": self.problem.boundary_order}
        return DualPairOperator(name, self.problem.interior, self.closure, meta)


def admm_solve(problem: ClosureProblem, *, state: Optional[AdmmState] = None,
               refine: bool = True, log_path=None) -> ClosureResult:
    """Run the splitting to the problem's tolerance.

    Update order per iteration: cone projection of Y(th) - lam1/t (deflated
    eigenvalue clip at -eps1), pinning projection of S(th) - lam2/t, the
    theta subproblem, then the dual descent steps.  Residual = max of the
    two consensus gaps and t times the projection movement.  A stalled run
    (less than 2x progress over 250 iterations) triggers one polish stage;
    on success the state is re-seeded with the polished primal-dual pair
    and iteration continues.  If max_iter is exhausted the best iterate is
    returned with converged=False.
    """
    t, eps1, tol = problem.t, problem.eps1, problem.tol
    n, nw, s = problem.n, problem.nw, problem.s
    S0, Smat, maskf = problem.S0, problem.Smat, problem.maskf
    Y0, Ymat = problem.Y0, problem.Ymat
    st = state if state is not None else _fresh_state(problem)
    theta = st.theta
    Sth = S0 + Smat @ theta
    Yth = Y0 + Ymat @ theta
    thpp, thp = st.theta_dprime, st.theta_prime
    lam1, lam2 = st.lam1, st.lam2
    hist = []
    log = []
    best = (np.inf, theta.copy())
    refined = False
    refine_failed = False
    iterations = 0
    for it in range(problem.max_iter):
        X = (Yth - lam1 / t).reshape(nw, nw)
        X = 0.5 * (X + X.T)
        ev, V = np.linalg.eigh(X)
        thpp_new = ((V * np.minimum(ev, -eps1)) @ V.T).ravel()
        thp_new = np.where(maskf, Sth - lam2 / t, S0)
        dual = t * max(np.linalg.norm(thpp_new - thpp),
                       np.linalg.norm(thp_new - thp))
        thpp, thp = thpp_new, thp_new
        st.theta_dprime, st.theta_prime = thpp, thp
        theta = theta_subproblem(st, problem)
        st.theta = theta
        Sth = S0 + Smat @ theta
        Yth = Y0 + Ymat @ theta
        r1 = float(np.linalg.norm(Yth - thpp))
        r2 = float(np.linalg.norm(Sth - thp))
        lam1 -= t * (Yth - thpp)
        lam2 -= t * (Sth - thp)
        res = max(r1, r2, dual)
        hist.append(res)
        iterations = it + 1
        st.iteration = iterations
        primal = max(r1, r2)
        lmax_s = float(np.linalg.eigvalsh(Sth.reshape(n, n))[-1])
        log.append((iterations, primal, dual, lmax_s,
                    problem.accuracy_residual(theta)))
        if res < best[0]:
            best = (res, theta.copy())
        if res <= tol:
            break
        stalled = (refine and not refined and not refine_failed
                   and iterations >= STALL_MIN_ITER
                   and hist[-STALL_WINDOW] < STALL_FACTOR * res)
        if stalled:
            from . import _refine
            out = _refine.refine_staged(problem, theta)
            if out is None:
                refine_failed = True
            else:
                theta, lam_dual = out
                st.theta = theta
                Sth = S0 + Smat @ theta
                Yth = Y0 + Ymat @ theta
                lam1 = -t * lam_dual.ravel()
                lam2 = np.zeros(n * n)
                thpp = Yth.copy()
                thp = np.where(maskf, Sth, S0)
                st.theta_dprime, st.theta_prime = thpp, thp
                st.lam1, st.lam2 = lam1, lam2
                refined = True
    converged = bool(hist and hist[-1] <= tol)
    if not converged:
        theta = best[1]
    st.history.extend(hist)
    monotone = all(hist[k] <= hist[k - 50] + 1e-15
                   for k in range(50, len(hist)))
    closure = problem.closure_from_theta(theta)
    result = ClosureResult(problem, closure, theta, converged, iterations,
                           float(hist[-1]) if hist else 0.0,
                           np.asarray(hist), monotone, refined, log)
    if log_path is not None:
        write_convergence_csv(result, log_path)
    return result


def write_convergence_csv(result: ClosureResult, path_or_fh) -> None:
    """Iteration log: iter, primal, dual, lmax(S), worst accuracy residual."""
    own = isinstance(path_or_fh, (str, bytes)) or hasattr(path_or_fh, "__fspath__")
    fh = open(path_or_fh, "w", newline="") if own else path_or_fh
    try:
        w = csv.writer(fh)
        w.writerow(["iter", "primal", "dual", "lmax_s", "accuracy_residual"])
        for row in result.log:
            w.writerow([row[0]] + [format(v, ".12g") for v in row[1:]])
    finally:
        if own:
            fh.close()
