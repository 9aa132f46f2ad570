"""Discrimination SDPs over PPT measurements, posed in the reduced block form.

Finding the best PPT measurement for an ensemble of N LDOI states on local
dimension n is a semidefinite program.  Posed on dense operators it has N
matrix variables of size n^2 x n^2; here each element is an LDOI triple with
3n^2 - 2n real parameters, its positivity and the positivity of its partial
transpose are one n x n block plus n(n-1)/2 two-by-two blocks each, and the
completeness constraint is eliminated by writing the last element as the
identity minus the others.  The result is the grouped block problem of
:mod:`ldoidist.blocksdp`, with the eliminated element supplying the tail
blocks shared by all groups.

The same machinery poses unambiguous discrimination: every conclusive element
is confined to the null space of the inner products with the other states, an
extra scalar variable t is pushed below every <P_k, rho_k> through 1 x 1
blocks, and the inconclusive element is the eliminated one.  Its verdict is
the optimal t compared against a threshold.

A dense reference solver over the full n^2 x n^2 operators, backed by an
off-the-shelf conic stack, is included for cross-checking at small n; it
shares no code with the block path.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .blocksdp import (
    EPS_FEAS,
    EPS_GAP,
    MAX_ITER,
    BlockSdpProblem,
    BlockSpec,
    GroupSpec,
    SdpSolution,
    TailSpec,
    solve_block_sdp,
)
from .measurements import Povm
from .states import Ensemble
from .triples import (
    LdoiTriple,
    hermitian_dimension,
    identity_triple,
    is_psd,
    partial_transpose,
    triple_from_blocks,
    triple_to_dense,
)

DENSE_MAX_N = 4
UNAMBIGUOUS_DELTA = 1e-6

__all__ = [
    "DENSE_MAX_N",
    "UNAMBIGUOUS_DELTA",
    "real_params",
    "triple_from_real_params",
    "dual_coords",
    "element_block_layout",
    "blocks_of_triple",
    "build_ppt_problem",
    "PptSolveResult",
    "solve_ppt",
    "CertificateCheck",
    "check_dual_certificate",
    "build_diagonal_certificate",
    "DenseSolveResult",
    "solve_ppt_primal_dense",
    "build_unambiguous_problem",
    "UnambiguousResult",
    "unambiguous_ppt_feasible",
]


def _pairs(n: int) -> list:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def real_params(t: LdoiTriple) -> np.ndarray:
    """Coordinates of a Hermitian triple in the canonical real basis.

    Layout: all of a row-major, then (Re, Im) of b[i, j] over pairs i < j,
    then the same for c.  Length 3n^2 - 2n.
    """
    n = t.n
    out = np.empty(hermitian_dimension(n))
    out[: n * n] = t.a.real.ravel()
    base = n * n
    for i, j in _pairs(n):
        out[base] = t.b[i, j].real
        out[base + 1] = t.b[i, j].imag
        base += 2
    for i, j in _pairs(n):
        out[base] = t.c[i, j].real
        out[base + 1] = t.c[i, j].imag
        base += 2
    return out


def triple_from_real_params(x, n: int) -> LdoiTriple:
    x = np.asarray(x, dtype=float)
    if x.shape != (hermitian_dimension(n),):
        raise ValueError(
            f"parameter vector has shape {x.shape}, expected ({hermitian_dimension(n)},)"
        )
    a = x[: n * n].reshape(n, n).astype(complex)
    b = np.zeros((n, n), dtype=complex)
    c = np.zeros((n, n), dtype=complex)
    base = n * n
    for i, j in _pairs(n):
        b[i, j] = x[base] + 1j * x[base + 1]
        b[j, i] = np.conj(b[i, j])
        base += 2
    for i, j in _pairs(n):
        c[i, j] = x[base] + 1j * x[base + 1]
        c[j, i] = np.conj(c[i, j])
        base += 2
    np.fill_diagonal(b, np.diagonal(a))
    np.fill_diagonal(c, np.diagonal(a))
    return LdoiTriple(a, b, c)


def dual_coords(rho: LdoiTriple) -> np.ndarray:
    """Vector r with <X, rho> = real_params(X) . r for every Hermitian X."""
    n = rho.n
    out = np.empty(hermitian_dimension(n))
    out[: n * n] = rho.a.real.ravel()
    base = n * n
    for i, j in _pairs(n):
        out[base] = 2.0 * rho.b[i, j].real
        out[base + 1] = 2.0 * rho.b[i, j].imag
        base += 2
    for i, j in _pairs(n):
        out[base] = 2.0 * rho.c[i, j].real
        out[base + 1] = 2.0 * rho.c[i, j].imag
        base += 2
    return out


@functools.lru_cache(maxsize=None)
def element_block_layout(n: int):
    """Canonical PSD blocks of one POVM element and their coefficient templates.

    Order: the n x n block of the element itself, the n x n block of its
    partial transpose, the 2 x 2 pair blocks of the element (i < j
    lexicographic), then the 2 x 2 pair blocks of the partial transpose.
    Each entry is (name, size, templates) with templates of shape
    (3n^2 - 2n, size, size), giving the block's dependence on the canonical
    real parameters.
    """
    t = hermitian_dimension(n)
    pairs = _pairs(n)
    bt = np.zeros((t, n, n), dtype=complex)
    ct = np.zeros((t, n, n), dtype=complex)
    gt = {pq: np.zeros((t, 2, 2), dtype=complex) for pq in pairs}
    ht = {pq: np.zeros((t, 2, 2), dtype=complex) for pq in pairs}
    for i in range(n):
        for j in range(n):
            p = i * n + j
            if i == j:
                bt[p, i, i] = 1.0
                ct[p, i, i] = 1.0
            elif i < j:
                gt[(i, j)][p, 0, 0] = 1.0
                ht[(i, j)][p, 0, 0] = 1.0
            else:
                gt[(j, i)][p, 1, 1] = 1.0
                ht[(j, i)][p, 1, 1] = 1.0
    base = n * n
    for i, j in pairs:
        re, im = base, base + 1
        bt[re, i, j] = bt[re, j, i] = 1.0
        bt[im, i, j] = 1j
        bt[im, j, i] = -1j
        ht[(i, j)][re, 0, 1] = ht[(i, j)][re, 1, 0] = 1.0
        ht[(i, j)][im, 0, 1] = -1j
        ht[(i, j)][im, 1, 0] = 1j
        base += 2
    for i, j in pairs:
        re, im = base, base + 1
        ct[re, i, j] = ct[re, j, i] = 1.0
        ct[im, j, i] = 1j
        ct[im, i, j] = -1j
        gt[(i, j)][re, 0, 1] = gt[(i, j)][re, 1, 0] = 1.0
        gt[(i, j)][im, 0, 1] = 1j
        gt[(i, j)][im, 1, 0] = -1j
        base += 2
    layout = [("diag", n, bt), ("ptdiag", n, ct)]
    layout += [(("pair",) + pq, 2, gt[pq]) for pq in pairs]
    layout += [(("ptpair",) + pq, 2, ht[pq]) for pq in pairs]
    for _, _, tpl in layout:
        tpl.setflags(write=False)
    return layout


def blocks_of_triple(t: LdoiTriple) -> list:
    """Values of the canonical blocks at a Hermitian triple, layout order."""
    n = t.n
    out = [t.b.copy(), t.c.T.copy()]
    for i, j in _pairs(n):
        out.append(np.array([[t.a[i, j], t.c[i, j]], [t.c[j, i], t.a[j, i]]]))
    for i, j in _pairs(n):
        out.append(np.array([[t.a[i, j], t.b[j, i]], [t.b[i, j], t.a[j, i]]]))
    return out


def build_ppt_problem(e: Ensemble) -> BlockSdpProblem:
    """Best-PPT-measurement SDP with the last element eliminated.

    One variable group per remaining element; the tail blocks express
    positivity and PPT of identity-minus-the-rest.  The initial point is the
    uniform POVM, strictly feasible, so the primal residual starts at zero.
    """
    n, count = e.n, len(e)
    if count < 2:
        raise ValueError("discrimination needs at least two states")
    layout = element_block_layout(n)
    t = hermitian_dimension(n)
    r_last = e.priors[-1] * dual_coords(e.states[-1])
    groups = []
    obj_groups = []
    for k in range(count - 1):
        blocks = [
            BlockSpec(size, np.zeros((size, size), dtype=complex), tpl)
            for _, size, tpl in layout
        ]
        groups.append(GroupSpec(t, blocks))
        obj_groups.append(e.priors[k] * dual_coords(e.states[k]) - r_last)
    ident = identity_triple(n)
    tail = TailSpec(
        blocks=[
            (size, f0, tpl)
            for (_, size, tpl), f0 in zip(layout, blocks_of_triple(ident))
        ],
        maps=[None] * (count - 1),
    )
    x0 = np.tile(real_params((1.0 / count) * ident), count - 1)
    return BlockSdpProblem(
        groups=groups,
        obj_groups=obj_groups,
        tail=tail,
        obj_const=float(e.priors[-1]),
        x0=x0,
    )


def _assemble_dual_pair(z_blocks: list, n: int) -> tuple:
    """Rebuild the two dual triples of one element from its multiplier blocks."""
    pairs = _pairs(n)
    half = 2 + len(pairs)
    y = triple_from_blocks(
        z_blocks[0], {pq: z_blocks[2 + k] for k, pq in enumerate(pairs)}
    )
    q = triple_from_blocks(
        z_blocks[1], {pq: z_blocks[half + k] for k, pq in enumerate(pairs)}
    )
    return y, q


@dataclass
class PptSolveResult:
    """Solver output: the value, the measurement, and a dual certificate.

    ``certificate`` is the operator H with H - p_k rho_k - T(q_list[k]) >= 0
    for every k and trace equal to the dual value; it can be re-verified
    independently with :func:`check_dual_certificate`.
    """

    value: float
    status: str
    povm: Povm
    certificate: LdoiTriple
    q_list: list
    solution: SdpSolution


def solve_ppt(e: Ensemble, tol_feas: float = EPS_FEAS, tol_gap: float = EPS_GAP,
              max_iter: int = MAX_ITER, verbose: bool = False) -> PptSolveResult:
    """Optimal PPT discrimination of an LDOI ensemble via the block solver."""
    problem = build_ppt_problem(e)
    sol = solve_block_sdp(problem, tol_feas=tol_feas, tol_gap=tol_gap,
                          max_iter=max_iter, verbose=verbose)
    n, count = e.n, len(e)
    elements = [triple_from_real_params(sol.x[sl], n) for sl in sol.group_slices]
    last = identity_triple(n)
    for el in elements:
        last = last - el
    elements.append(last)
    povm = Povm(elements, labels=list(range(count)), class_tag="ppt")
    y_tail, q_tail = _assemble_dual_pair(sol.z_tail, n)
    certificate = (
        float(e.priors[-1]) * e.states[-1] + y_tail + partial_transpose(q_tail)
    )
    q_list = [
        _assemble_dual_pair(zb, n)[1] for zb in sol.z_groups
    ] + [q_tail]
    return PptSolveResult(
        value=sol.primal_value,
        status=sol.status,
        povm=povm,
        certificate=certificate,
        q_list=q_list,
        solution=sol,
    )


@dataclass
class CertificateCheck:
    ok: bool
    value: float
    min_eigenvalue: float
    worst_state: int


def check_dual_certificate(e: Ensemble, h: LdoiTriple, q_list=None,
                           tol: float = 1e-7) -> CertificateCheck:
    """Verify an upper-bound certificate against an ensemble.

    With ``q_list`` absent the constrained form is used: H must dominate
    p_k T(rho_k) for every k, which bounds every PPT measurement's success
    by tr H.  With ``q_list`` given the full form is checked instead:
    q_k >= 0 and H - p_k rho_k - T(q_k) >= 0.  Eigenvalues may dip to -tol.
    """
    value = float(h.trace().real)
    min_eig = np.inf
    worst = -1
    ok = True
    for k, (p, rho) in enumerate(zip(e.priors, e.states)):
        mats = []
        if q_list is None:
            mats.append(h - float(p) * partial_transpose(rho))
        else:
            qk = q_list[k]
            mats.append(qk)
            mats.append(h - float(p) * rho - partial_transpose(qk))
        for m in mats:
            res = is_psd(m, tol)
            if res.min_eigenvalue < min_eig:
                min_eig = res.min_eigenvalue
                worst = k
            if not res:
                ok = False
    return CertificateCheck(ok, value, float(min_eig), worst)


def build_diagonal_certificate(spec, c) -> LdoiTriple:
    """Diagonal upper-bound certificate of a basis spec from its c vector.

    The entry for label (i, j), i != j, is max(|amp[i, j]|, |amp[j, i]|)^2
    over n^2; the diagonal labels carry c_i / n^2.  Its trace is the bound
    (s + sum c) / n^2 and it passes the constrained form of
    :func:`check_dual_certificate` against the spec's uniform ensemble.
    """
    c = np.asarray(getattr(c, "c", c), dtype=float)
    n = spec.n
    if c.shape != (n,):
        raise ValueError(f"c has shape {c.shape}, expected ({n},)")
    mags = np.abs(spec.amp) ** 2
    gamma = np.maximum(mags, mags.T)
    np.fill_diagonal(gamma, c)
    a = gamma / n**2
    d = np.diag(np.diagonal(a))
    return LdoiTriple(a, d, d)


@dataclass
class DenseSolveResult:
    value: float
    status: str
    elements: list


def solve_ppt_primal_dense(e: Ensemble, solver_tol: float = 1e-9) -> DenseSolveResult:
    """Reference solve on full n^2 x n^2 operators through an external conic stack.

    Kept deliberately independent of the block path: dense Hermitian
    variables, dense partial transposes, generic solver.  Refuses n above
    ``DENSE_MAX_N``, where the dense formulation stops being a sane oracle.
    """
    import cvxpy as cp

    n, count = e.n, len(e)
    if n > DENSE_MAX_N:
        raise ValueError(
            f"dense reference solver refuses n={n} (limit {DENSE_MAX_N})"
        )
    d = n * n
    rhos = [triple_to_dense(s) for s in e.states]
    povm_vars = [cp.Variable((d, d), hermitian=True) for _ in range(count)]
    constraints = [sum(povm_vars) == np.eye(d)]
    for var in povm_vars:
        constraints.append(var >> 0)
        constraints.append(cp.partial_transpose(var, dims=[n, n], axis=0) >> 0)
    objective = cp.Maximize(
        cp.real(
            sum(
                float(p) * cp.trace(rho @ var)
                for p, rho, var in zip(e.priors, rhos, povm_vars)
            )
        )
    )
    prob = cp.Problem(objective, constraints)
    prob.solve(
        solver=cp.CVXOPT,
        abstol=solver_tol,
        reltol=solver_tol,
        feastol=solver_tol,
    )
    if prob.status == cp.OPTIMAL:
        status = "optimal"
    elif prob.status in (cp.INFEASIBLE, cp.UNBOUNDED):
        status = "infeasible"
    else:
        status = "numerical-limit"
    return DenseSolveResult(
        value=float(prob.value),
        status=status,
        elements=[np.array(var.value) for var in povm_vars],
    )


def build_unambiguous_problem(e: Ensemble) -> BlockSdpProblem:
    """Max-min SDP for unambiguous PPT discrimination.

    Conclusive element k is parameterized inside the null space of the
    functionals <., rho_j>, j != k, making the zero-error constraints exact
    by construction.  A global variable t sits under every <P_k, rho_k>
    through a 1 x 1 block, the inconclusive element is the eliminated tail,
    and the objective is t alone.
    """
    n, count = e.n, len(e)
    if count < 2:
        raise ValueError("unambiguous discrimination needs at least two states")
    layout = element_block_layout(n)
    coords = [dual_coords(rho) for rho in e.states]
    groups = []
    obj_groups = []
    maps = []
    for k in range(count):
        rows = np.array([coords[j] for j in range(count) if j != k])
        nk = null_space(rows)
        if nk.shape[1] == 0:
            raise RuntimeError(f"zero-error null space of element {k} is empty")
        blocks = [
            BlockSpec(size, np.zeros((size, size), dtype=complex),
                      np.einsum("tp,tij->pij", nk, tpl))
            for _, size, tpl in layout
        ]
        gain = (nk.T @ coords[k]).reshape(-1, 1, 1).astype(complex)
        blocks.append(
            BlockSpec(1, np.zeros((1, 1), dtype=complex), gain,
                      gcoeffs=np.full((1, 1, 1), -1.0, dtype=complex))
        )
        groups.append(GroupSpec(nk.shape[1], blocks))
        obj_groups.append(np.zeros(nk.shape[1]))
        maps.append(nk)
    ident = identity_triple(n)
    tail = TailSpec(
        blocks=[
            (size, f0, tpl)
            for (_, size, tpl), f0 in zip(layout, blocks_of_triple(ident))
        ],
        maps=maps,
    )
    x0 = np.zeros(sum(g.n_vars for g in groups) + 1)
    x0[-1] = -0.5
    return BlockSdpProblem(
        groups=groups,
        obj_groups=obj_groups,
        tail=tail,
        n_global=1,
        obj_global=np.array([1.0]),
        x0=x0,
    )


@dataclass
class UnambiguousResult:
    """Verdict on unambiguous PPT discriminability.

    ``threshold`` is the optimized worst-case conclusive probability; the
    ensemble counts as unambiguously distinguishable when it clears
    ``delta`` and the solve converged.  ``povm`` (inconclusive element
    first, label -1) is attached only on a feasible verdict.
    """

    feasible: bool
    threshold: float
    status: str
    solution: SdpSolution
    povm: Povm = None


def unambiguous_ppt_feasible(e: Ensemble, delta: float = UNAMBIGUOUS_DELTA,
                             tol_feas: float = EPS_FEAS, tol_gap: float = EPS_GAP,
                             max_iter: int = MAX_ITER,
                             verbose: bool = False) -> UnambiguousResult:
    problem = build_unambiguous_problem(e)
    sol = solve_block_sdp(problem, tol_feas=tol_feas, tol_gap=tol_gap,
                          max_iter=max_iter, verbose=verbose)
    n, count = e.n, len(e)
    tau = float(sol.x[-1])
    feasible = sol.status == "optimal" and tau >= delta
    povm = None
    if feasible:
        elements = []
        last = identity_triple(n)
        for k, sl in enumerate(sol.group_slices):
            pk = triple_from_real_params(problem.tail.maps[k] @ sol.x[sl], n)
            elements.append(pk)
            last = last - pk
        povm = Povm([last] + elements, labels=[-1] + list(range(count)),
                    class_tag="ppt")
    return UnambiguousResult(
        feasible=feasible,
        threshold=tau,
        status=sol.status,
        solution=sol,
        povm=povm,
    )
