"""Closed-form bounds on distinguishing the uniform ensemble of an LDOI basis.

For a basis spec (u, amp) on local dimension n, write
s = sum over ordered pairs i != j of max(|amp[i, j]|^2, |amp[j, i]|^2).
The guaranteed one-way LOCC success probability is

    (s + best assignment weight of |u|^2) / n^2,

achieved by a product-projector measurement.  On the upper side, any vector c
with c_i >= max_k |u[k, i]|^2 and c_i c_j >= |amp[i, j]|^2 |amp[j, i]|^2
yields the PPT (hence separable, hence LOCC) bound (s + sum_i c_i) / n^2 via
a diagonal dual certificate.  This module computes the lower bound, the best
such c, the cheap choice c_i = max(1/2, column max), and the closed form that
applies when |u|^2 admits a perfect matching of entries >= 1/2, in which case
lower and upper bound coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .basis import LdoiBasisSpec
from .measurements import Povm, build_local_povm

ASSIGN_TIE_TOL = 1e-9
C_GAP_TOL = 1e-10
C_VERIFY_SLACK = 1e-9

__all__ = [
    "AssignmentResult",
    "CertificateC",
    "LoccBound",
    "CBound",
    "max_assignment",
    "locc_lower_bound",
    "ppt_upper_bound_opt_c",
    "ppt_upper_bound_weak",
    "certificate_feasible",
    "closed_form_large_u",
    "universal_lower_bound",
    "gap_bound",
]


@dataclass
class AssignmentResult:
    """Optimal assignment: permutation sigma maximizing sum_i w[i, sigma[i]]."""

    permutation: np.ndarray
    value: float


def max_assignment(weights) -> AssignmentResult:
    """Maximum-weight assignment, lexicographically smallest among optima.

    The optimum value comes from a standard assignment solve; the returned
    permutation is then rebuilt row by row, giving each row the smallest
    column that keeps the total within ``ASSIGN_TIE_TOL`` of the optimum.
    Deterministic, so repeated runs and reports agree to the byte.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weights must be square, got shape {w.shape}")
    n = w.shape[0]
    rows, cols = linear_sum_assignment(w, maximize=True)
    best = float(w[rows, cols].sum())
    free = list(range(n))
    sigma = np.empty(n, dtype=int)
    prefix = 0.0
    for i in range(n):
        for j in free:
            rest_cols = [col for col in free if col != j]
            if rest_cols:
                sub = w[np.ix_(range(i + 1, n), rest_cols)]
                r2, c2 = linear_sum_assignment(sub, maximize=True)
                tail = float(sub[r2, c2].sum())
            else:
                tail = 0.0
            if prefix + w[i, j] + tail >= best - ASSIGN_TIE_TOL:
                sigma[i] = j
                prefix += w[i, j]
                free.remove(j)
                break
        else:
            raise RuntimeError("assignment refinement failed to place a row")
    return AssignmentResult(sigma, float(w[np.arange(n), sigma].sum()))


def _pair_max_sum(spec: LdoiBasisSpec) -> float:
    mags = np.abs(spec.amp) ** 2
    total = 0.0
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            total += 2.0 * max(mags[i, j], mags[j, i])
    return total


@dataclass
class LoccBound:
    value: float
    permutation: np.ndarray
    povm: Povm


def locc_lower_bound(spec: LdoiBasisSpec) -> LoccBound:
    """Guaranteed success probability of the best product-projector strategy.

    Also returns the permutation of diagonal outcomes that attains it and the
    achieving POVM itself.
    """
    assign = max_assignment(np.abs(spec.u) ** 2)
    value = (_pair_max_sum(spec) + assign.value) / spec.n**2
    return LoccBound(value, assign.permutation, build_local_povm(spec, assign.permutation))


@dataclass
class CertificateC:
    """The diagonal weights c of an upper-bound certificate."""

    c: np.ndarray


@dataclass
class CBound:
    value: float
    certificate: CertificateC


def _column_max(spec: LdoiBasisSpec) -> np.ndarray:
    return (np.abs(spec.u) ** 2).max(axis=0)


def _pair_products(spec: LdoiBasisSpec) -> np.ndarray:
    mags = np.abs(spec.amp) ** 2
    return mags * mags.T


def certificate_feasible(spec: LdoiBasisSpec, cert: CertificateC,
                         slack: float = C_VERIFY_SLACK) -> bool:
    """Both constraint families hold, each allowed to dip by ``slack``."""
    c = np.asarray(cert.c, dtype=float)
    if c.shape != (spec.n,):
        raise ValueError(f"certificate has shape {c.shape}, expected ({spec.n},)")
    if np.any(c < _column_max(spec) - slack):
        return False
    q = _pair_products(spec)
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            if c[i] * c[j] < q[i, j] - slack:
                return False
    return True


def ppt_upper_bound_weak(spec: LdoiBasisSpec) -> CBound:
    """Upper bound from the cheap certificate c_i = max(1/2, column max of |u|^2).

    Feasible because every pair product |amp[i, j]|^2 |amp[j, i]|^2 is at
    most 1/4 while c_i c_j >= 1/4.
    """
    c = np.maximum(0.5, _column_max(spec))
    value = (_pair_max_sum(spec) + c.sum()) / spec.n**2
    return CBound(float(value), CertificateC(c))


def ppt_upper_bound_opt_c(spec: LdoiBasisSpec) -> CBound:
    """Upper bound from the cheapest feasible certificate.

    Minimizing sum_i c_i subject to c_i >= m_i and c_i c_j >= q_ij is, in the
    variables x_i = log c_i, a convex problem with linear constraints.  It is
    solved here by a log-barrier Newton method to duality gap below
    ``C_GAP_TOL``; the result is re-verified against the raw constraints
    before it is returned.
    """
    n = spec.n
    m = _column_max(spec)
    if np.any(m <= 0):
        raise ValueError("u has an all-zero column, not unitary")
    q = _pair_products(spec)
    rows = [np.eye(n)[i] for i in range(n)]
    rhs = list(np.log(m))
    for i in range(n):
        for j in range(i + 1, n):
            if q[i, j] > 0:
                row = np.zeros(n)
                row[i] = row[j] = 1.0
                rows.append(row)
                rhs.append(np.log(q[i, j]))
    con = np.array(rows)
    lim = np.array(rhs)
    x = np.log(np.maximum(0.5, m) + 0.5)
    t = 1.0
    while len(lim) / t >= C_GAP_TOL:
        for _ in range(80):
            slack = con @ x - lim
            ex = np.exp(x)
            grad = t * ex - con.T @ (1.0 / slack)
            hess = np.diag(t * ex) + (con.T * slack**-2) @ con
            dx = np.linalg.solve(hess, -grad)
            decrement = float(-grad @ dx)
            if decrement <= 2e-12:
                break
            f0 = t * ex.sum() - np.log(slack).sum()
            step = 1.0
            while step > 1e-14:
                xn = x + step * dx
                sn = con @ xn - lim
                if np.all(sn > 0) and (
                    t * np.exp(xn).sum() - np.log(sn).sum()
                    <= f0 - 0.25 * step * decrement
                ):
                    x = xn
                    break
                step *= 0.5
            else:
                break
        t *= 10.0
    c = np.exp(x)
    cert = CertificateC(c)
    if not certificate_feasible(spec, cert):
        raise RuntimeError("optimized certificate failed re-verification")
    value = (_pair_max_sum(spec) + c.sum()) / n**2
    return CBound(float(value), cert)


def closed_form_large_u(spec: LdoiBasisSpec):
    """Exact optimum when |u|^2 has a perfect matching of entries >= 1/2.

    Returns (s + sum of column maxima of |u|^2) / n^2, at which point the
    LOCC lower bound and the PPT upper bound meet; returns None when the
    matching hypothesis fails (checked with tolerance 1e-12).
    """
    usq = np.abs(spec.u) ** 2
    indicator = (usq >= 0.5 - 1e-12).astype(float)
    rows, cols = linear_sum_assignment(indicator, maximize=True)
    if indicator[rows, cols].sum() < spec.n - 0.5:
        return None
    return float((_pair_max_sum(spec) + usq.max(axis=0).sum()) / spec.n**2)


def universal_lower_bound(n: int) -> float:
    """Worst-case guaranteed LOCC success over all bases on C^n (x) C^n.

    Equals 1/2 - (n - 2)/(2 n^2); minimized at n = 4 where it is 7/16, and
    it tends back to 1/2 as n grows.
    """
    if n < 2:
        raise ValueError(f"need local dimension at least 2, got {n}")
    return 0.5 - (n - 2) / (2.0 * n * n)


def gap_bound(n: int) -> float:
    """Largest possible optimum-minus-guarantee spread: (n - 2)/(2 n^2)."""
    if n < 2:
        raise ValueError(f"need local dimension at least 2, got {n}")
    return (n - 2) / (2.0 * n * n)
