"""Stall acceleration for the closure solver.

The consensus iteration in closure.py approaches the semidefinite boundary
at a crawl: the active face carries tiny eigenvalues and the projections
move O(1/k).  This module polishes a stalled iterate instead of waiting:

1. barrier_path: log-det interior-point path following on the deflated
   cone (plus log floors for the weights), started from a shifted cone if
   the iterate is slightly infeasible, down to a small centering mu; the
   path multiplier mu (-Y)^{-1} estimates the dual.
2. ssn_sweep: semismooth Newton on the KKT natural residual
   [stationarity; Lam - P_psd(Lam + Y)] with the exact Loewner Jacobian of
   the projection, Levenberg-Marquardt damping, and optional line sweeps
   along the flattest Jacobian directions when a step is rejected.

refine_staged chains them (standard depth first, a deeper path plus
sweeps if the residual stays above 1e-10) and returns a primal-dual pair
good enough that re-seeded consensus iterations converge immediately, or
None so the caller can continue unassisted.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = ["barrier_path", "refine_staged", "ssn_sweep"]


def _cost(problem, th):
    """Ridge truncation cost with the weight anchor: value, gradient, Hessian."""
    s = problem.s
    anchor = problem.h_target if problem.h_target is not None else 0.0
    w_h = problem.h_weight
    r = problem.Ct @ th - problem.ct
    v = r @ r + problem.lam_c * (th @ th) + w_h * (th[s * s] - anchor) ** 2
    g = 2 * problem.Ct.T @ r + 2 * problem.lam_c * th
    g[s * s] += 2 * w_h * (th[s * s] - anchor)
    H = 2 * problem.Ct.T @ problem.Ct + 2 * problem.lam_c * np.eye(problem.npar)
    H[s * s, s * s] += 2 * w_h
    return v, g, H


def _y_of(problem, th):
    nw = problem.nw
    Y = (problem.Y0 + problem.Ymat @ th).reshape(nw, nw)
    return 0.5 * (Y + Y.T)


def barrier_path(problem, th_start, mu_end=1e-12):
    """Follow the log-det central path from a (near-)feasible iterate.

    Returns (theta, dual_estimate) or None when the start cannot be made
    strictly feasible or a Newton step fails to backtrack.
    """
    nw, Ymat, Z, th_p = problem.nw, problem.Ymat, problem.Z, problem.th_p
    s, eps2 = problem.s, problem.eps2
    nz = Z.shape[0]
    nq = s * s
    th = np.asarray(th_start, dtype=float).copy()
    Y = _y_of(problem, th)
    if np.linalg.norm(Y) < 1e-10:
        return None
    lm = np.linalg.eigvalsh(Y).max()
    delta = lm + 1e-5 if lm > -1e-5 else 0.0
    mu = 1e-3
    xi = np.linalg.lstsq(Z.T, th - th_p, rcond=None)[0]
    th = th_p + Z.T @ xi
    if th[nq:].min() <= eps2:
        return None

    def phi(thv, mu_v, delta_v):
        evv = np.linalg.eigvalsh(_y_of(problem, thv))
        hv = thv[nq:]
        if (delta_v - evv.max()) <= 0 or (hv <= eps2).any():
            return np.inf
        cv, _, _ = _cost(problem, thv)
        return cv - mu_v * np.log(delta_v - evv).sum() \
            - mu_v * np.log(hv - eps2).sum()

    def newton(mu_v, delta_v):
        nonlocal xi, th
        Y = _y_of(problem, th)
        hh = th[nq:]
        Yinv = np.linalg.inv(delta_v * np.eye(nw) - Y)
        _, cg, cH = _cost(problem, th)
        g_th = cg + mu_v * (Ymat.T @ Yinv.ravel())
        g_th[nq:] += -mu_v / (hh - eps2)
        Hbar = cH.copy()
        Yq = Ymat[:, :nq]
        Mps = np.empty((nq, nw * nw))
        for p in range(nq):
            Yp = Yq[:, p].reshape(nw, nw)
            Mps[p] = (Yinv @ Yp @ Yinv).ravel()
        Hbar[:nq, :nq] += mu_v * (Mps @ Yq)
        for i in range(s):
            Hbar[nq + i, nq + i] += mu_v / (hh[i] - eps2) ** 2
        gz = Z @ g_th
        Hz = Z @ Hbar @ Z.T
        reg = 1e-13 * np.linalg.norm(Hz)
        try:
            dxi = -np.linalg.solve(Hz + reg * np.eye(nz), gz)
        except np.linalg.LinAlgError:
            return None
        p0 = phi(th, mu_v, delta_v)
        slope = gz @ dxi
        alp = 1.0
        for _ in range(50):
            th_try = th_p + Z.T @ (xi + alp * dxi)
            if phi(th_try, mu_v, delta_v) <= p0 + 0.25 * alp * slope:
                break
            alp *= 0.5
        else:
            return None
        xi = xi + alp * dxi
        th = th_p + Z.T @ xi
        return np.sqrt(max(-slope * alp, 0.0))

    # phase 0: pull a slightly infeasible start inside through a shifted cone
    guard = 0
    while delta > 0:
        nd = newton(mu, delta)
        if nd is None:
            return None
        lm = np.linalg.eigvalsh(_y_of(problem, th)).max()
        if lm < -1e-4:
            delta = 0.0
        elif nd < 1e-8:
            delta = max((delta + lm) * 0.5, lm + 1e-9) if lm > -1e-9 else 0.0
        guard += 1
        if guard > 60:
            return None
    # main path
    while True:
        target = 0.3 * np.sqrt(mu) if mu > mu_end else 1e-11
        for _ in range(6 if mu > mu_end else 14):
            nd = newton(mu, 0.0)
            if nd is None:
                return None
            if nd <= target:
                break
        if mu <= mu_end:
            break
        mu = max(mu * 0.15, mu_end)
    Yf = _y_of(problem, th)
    return th, mu * np.linalg.inv(-Yf)


def _vech(A):
    n = A.shape[0]
    iu = np.triu_indices(n)
    w = np.sqrt(2.0) * np.ones(len(iu[0]))
    w[iu[0] == iu[1]] = 1.0
    return A[iu] * w


def _unvech(v, n):
    iu = np.triu_indices(n)
    w = np.sqrt(2.0) * np.ones(len(iu[0]))
    w[iu[0] == iu[1]] = 1.0
    A = np.zeros((n, n))
    A[iu] = v / w
    return A + A.T - np.diag(np.diag(A))


def ssn_sweep(problem, th0, lam0, tol=1e-12, itmax=80, clean=1e-3, sweep=True):
    """Semismooth Newton on the cone-KKT natural residual.

    Unknowns (xi, vech Lam); residual [stationarity; vech(Lam - P+(Lam+Y))];
    the projection is differentiated through its Loewner divided-difference
    form.  ``clean`` zeroes small dual eigenvalues before starting (the
    barrier leaks mass onto inactive modes); ``sweep`` enables bounded line
    searches along the flattest right-singular directions of the Jacobian.
    Returns (theta, psd dual, relative residual).
    """
    nw, Ymat, Z, th_p = problem.nw, problem.Ymat, problem.Z, problem.th_p
    nz = Z.shape[0]
    iu = np.triu_indices(nw)
    nm = len(iu[0])
    wgt = np.sqrt(2.0) * np.ones(nm)
    wgt[iu[0] == iu[1]] = 1.0

    wL, VL = np.linalg.eigh(0.5 * (lam0 + lam0.T))
    wL = np.maximum(wL, 0.0)
    if clean is not None:
        wL[wL < clean * max(wL.max(), 1e-30)] = 0.0
    lam = (VL * wL) @ VL.T
    xi0 = np.linalg.lstsq(Z.T, np.asarray(th0, float) - th_p, rcond=None)[0]

    def residual(x):
        xi = x[:nz]
        L = _unvech(x[nz:], nw)
        th = th_p + Z.T @ xi
        Y = _y_of(problem, th)
        _, cg, _ = _cost(problem, th)
        R1 = Z @ (cg + Ymat.T @ L.ravel())
        d, V = np.linalg.eigh(L + Y)
        Pp = (V * np.maximum(d, 0.0)) @ V.T
        R2 = _vech(L - Pp)
        return np.concatenate([R1, R2]), (th, Y, L, d, V, cg)

    def jacobian(x, aux):
        th, Y, L, d, V, cg = aux
        _, _, cH = _cost(problem, th)
        J11 = Z @ cH @ Z.T
        J12 = np.zeros((nz, nm))
        for t_, (a, b) in enumerate(zip(*iu)):
            E = np.zeros((nw, nw))
            E[a, b] = 1.0 / wgt[t_]
            E[b, a] = 1.0 / wgt[t_]
            if a == b:
                E[a, b] = 1.0
            J12[:, t_] = Z @ (Ymat.T @ E.ravel())
        dp = np.maximum(d, 0.0)
        Om = np.zeros((nw, nw))
        for i in range(nw):
            for j in range(nw):
                if abs(d[i] - d[j]) > 1e-14 * max(1, abs(d[i]), abs(d[j])):
                    Om[i, j] = (dp[i] - dp[j]) / (d[i] - d[j])
                else:
                    Om[i, j] = 1.0 if d[i] > 0 else 0.0

        def dPp(Hm):
            return V @ (Om * (V.T @ Hm @ V)) @ V.T

        J21 = np.zeros((nm, nz))
        YmZ = Ymat @ Z.T
        for p in range(nz):
            dY = YmZ[:, p].reshape(nw, nw)
            J21[:, p] = -_vech(dPp(dY))
        J22 = np.zeros((nm, nm))
        for t_, (a, b) in enumerate(zip(*iu)):
            E = np.zeros((nw, nw))
            E[a, b] = 1.0 / wgt[t_]
            E[b, a] = 1.0 / wgt[t_]
            if a == b:
                E[a, b] = 1.0
            J22[:, t_] = _vech(E - dPp(E))
        return np.block([[J11, J12], [J21, J22]])

    x = np.concatenate([xi0, _vech(lam)])
    R, aux = residual(x)
    nR = np.linalg.norm(R)
    scale = max(1.0, np.linalg.norm(Z @ aux[5]))
    nu = 1e-12
    for it in range(itmax):
        if nR <= tol * scale:
            break
        J = jacobian(x, aux)
        JtJ = J.T @ J
        JtR = J.T @ R
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(JtJ + nu * np.eye(len(x)), -JtR)
            except np.linalg.LinAlgError:
                nu *= 10
                continue
            xt = x + step
            Rt, auxt = residual(xt)
            nRt = np.linalg.norm(Rt)
            if nRt < nR:
                x, R, aux, nR = xt, Rt, auxt, nRt
                nu = max(nu / 5, 1e-14)
                accepted = True
                break
            nu *= 10
        improved_by_sweep = False
        if sweep and (not accepted or (it > 5 and it % 4 == 3)):
            _, _, Vt = np.linalg.svd(J)
            for vi in range(1, 7):
                v = Vt[-vi]
                f = lambda t_: np.linalg.norm(residual(x + t_ * v)[0])
                r = minimize_scalar(f, bounds=(-0.02, 0.02), method="bounded",
                                    options={"xatol": 1e-14})
                if r.fun < nR * (1 - 1e-4):
                    x = x + r.x * v
                    R, aux = residual(x)
                    nR = np.linalg.norm(R)
                    improved_by_sweep = True
        if not accepted and not improved_by_sweep:
            break
    th = th_p + Z.T @ x[:nz]
    L = _unvech(x[nz:], nw)
    w, V = np.linalg.eigh(L)
    L = (V * np.maximum(w, 0.0)) @ V.T
    return th, L, nR / scale


def refine_staged(problem, th_stall):
    """Polish a stalled iterate; (theta, dual) below 1e-9 KKT residual or None."""
    out = barrier_path(problem, th_stall, mu_end=1e-12)
    if out is None:
        return None
    th1, lam1 = out
    best = ssn_sweep(problem, th1, lam1, clean=1e-3, sweep=False)
    if best[2] > 1e-10:
        deep = barrier_path(problem, th_stall, mu_end=1e-14)
        if deep is not None:
            th2, lam2 = deep
            w, V = np.linalg.eigh(lam2)
            w_cut = w.copy()
            w_cut[w_cut < 0.5 * np.sqrt(1e-14)] = 0.0
            for seed in (lam2, (V * np.maximum(w_cut, 0.0)) @ V.T):
                cand = ssn_sweep(problem, th2, seed, clean=None, sweep=True)
                if cand[2] < best[2]:
                    best = cand
    th, lam, r = best
    if r > 1e-9:
        return None
    return th, lam
