"""Interior-point solver for SDPs made of many small Hermitian blocks.

The problem class solved here is the linear matrix inequality form

    maximize    obj . x + obj_const
    subject to  G_b(x) >= 0   for every block b,

where each G_b is affine in the real variable vector x and every block is a
small Hermitian matrix.  Variables are partitioned into groups; a block
belongs either to one group (it involves only that group's variables, plus
optional global variables shared by all groups) or to the tail, whose blocks
involve every group through per-group linear maps applied to one shared list
of coefficient templates:

    tail block value = f0 - sum_tau y_tau * template_tau,
    y = sum_g maps[g] @ x_g.

This shape is exactly what POVM completeness elimination produces: the
eliminated element is an affine function of all the others, so its positivity
blocks couple every group, but only through the common template basis.  The
Schur complement of the Newton system is then block diagonal plus a low-rank
coupling plus a thin border for the globals, and each iteration solves it
with the matrix inversion lemma instead of factoring the full system.  A
problem with one group and no tail degenerates to the ordinary dense Schur
path with no overhead.

The algorithm is a standard primal-dual method with Nesterov-Todd scaling and
a Mehrotra predictor-corrector step.  Per block and iteration it needs two
Cholesky factorizations and one singular value decomposition, all at the
block size; nothing larger than a block, the per-group Schur pieces, or the
template capacitance is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS_FEAS = 1e-8
EPS_GAP = 1e-7
MAX_ITER = 200
STEP_FRACTION = 0.98

__all__ = [
    "EPS_FEAS",
    "EPS_GAP",
    "MAX_ITER",
    "BlockSpec",
    "GroupSpec",
    "TailSpec",
    "BlockSdpProblem",
    "SdpSolution",
    "solve_block_sdp",
]


def _herm(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass
class BlockSpec:
    """One Hermitian PSD block, affine in its group's variables.

    ``coeffs`` has shape (t_group, s, s); ``gcoeffs``, when present, has
    shape (n_global, s, s) and carries the coefficients of the global
    variables on this block.
    """

    size: int
    f0: np.ndarray
    coeffs: np.ndarray
    gcoeffs: np.ndarray = None


@dataclass
class GroupSpec:
    n_vars: int
    blocks: list


@dataclass
class TailSpec:
    """Blocks coupling all groups through shared templates.

    ``blocks`` is a list of (size, f0, templates) with templates of shape
    (T, s, s); ``maps[g]`` is the (T, t_g) matrix feeding group g's variables
    into the template weights, or None for the identity.
    """

    blocks: list
    maps: list


@dataclass
class BlockSdpProblem:
    groups: list
    obj_groups: list
    tail: TailSpec = None
    n_global: int = 0
    obj_global: np.ndarray = None
    obj_const: float = 0.0
    x0: np.ndarray = None

    def n_vars(self) -> int:
        return sum(g.n_vars for g in self.groups) + self.n_global

    def block_sizes(self) -> list:
        sizes = [b.size for g in self.groups for b in g.blocks]
        if self.tail is not None:
            sizes += [size for size, _, _ in self.tail.blocks]
        return sizes


@dataclass
class SdpSolution:
    """Solver outcome.

    ``status`` is 'optimal', 'infeasible' or 'numerical-limit'.  ``x`` holds
    all variables, group slices first and globals last; ``z_groups`` and
    ``z_tail`` expose the dual blocks in problem order for certificate
    extraction, ``s_groups`` and ``s_tail`` the primal slacks.
    """

    status: str
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    x: np.ndarray
    group_slices: list
    z_groups: list = field(default_factory=list)
    z_tail: list = field(default_factory=list)
    s_groups: list = field(default_factory=list)
    s_tail: list = field(default_factory=list)
    primal_residual: float = 0.0
    dual_residual: float = 0.0


class _Work:
    """Per-block scratch: current point, factorizations, directions."""

    __slots__ = (
        "size", "s", "z", "chol_s", "chol_z", "lam", "winv", "rn", "rni",
        "r1", "ds_aff", "dz_aff",
    )

    def __init__(self, size: int):
        self.size = size


class _Prep:
    """Problem unpacked for the solve: slices and flattened coefficient caches."""

    def __init__(self, problem: BlockSdpProblem):
        self.problem = problem
        self.n_glob = problem.n_global
        self.slices = []
        pos = 0
        for g in problem.groups:
            self.slices.append(slice(pos, pos + g.n_vars))
            pos += g.n_vars
        self.glob_slice = slice(pos, pos + self.n_glob)
        self.n_vars = pos + self.n_glob
        obj = np.zeros(self.n_vars)
        for sl, og in zip(self.slices, problem.obj_groups):
            obj[sl] = np.asarray(og, dtype=float)
        if self.n_glob:
            obj[self.glob_slice] = np.asarray(problem.obj_global, dtype=float)
        self.obj = obj
        # per block: (size, f0, coefficient stack, stack flattened to rows)
        self.gblocks = []
        for gi, g in enumerate(problem.groups):
            entries = []
            for b in g.blocks:
                coeffs = np.asarray(b.coeffs, dtype=complex)
                stack = coeffs
                if self.n_glob:
                    extra = (
                        np.asarray(b.gcoeffs, dtype=complex)
                        if b.gcoeffs is not None
                        else np.zeros((self.n_glob, b.size, b.size), dtype=complex)
                    )
                    stack = np.concatenate([coeffs, extra], axis=0)
                entries.append(
                    (b.size, np.asarray(b.f0, dtype=complex),
                     stack, stack.reshape(stack.shape[0], -1))
                )
            self.gblocks.append(entries)
        self.tblocks = []
        if problem.tail is not None:
            for size, f0, templates in problem.tail.blocks:
                tpl = np.asarray(templates, dtype=complex)
                self.tblocks.append(
                    (size, np.asarray(f0, dtype=complex), tpl, tpl.reshape(tpl.shape[0], -1))
                )
            self.n_templates = self.tblocks[0][2].shape[0] if self.tblocks else 0
            self.maps = [
                m if m is None else np.asarray(m, dtype=float)
                for m in problem.tail.maps
            ]
        else:
            self.n_templates = 0
            self.maps = None
        self.total_dim = sum(e[0] for blocks in self.gblocks for e in blocks)
        self.total_dim += sum(e[0] for e in self.tblocks)

    def map_apply(self, gi: int, xg: np.ndarray) -> np.ndarray:
        m = self.maps[gi]
        return xg if m is None else m @ xg

    def map_adjoint(self, gi: int, y: np.ndarray) -> np.ndarray:
        m = self.maps[gi]
        return y if m is None else m.T @ y

    def tail_weights(self, x: np.ndarray) -> np.ndarray:
        y = np.zeros(self.n_templates)
        for gi, sl in enumerate(self.slices):
            y += self.map_apply(gi, x[sl])
        return y

    def forward(self, x: np.ndarray, with_const: bool) -> list:
        """Every block's value at x; only the linear part when with_const is False."""
        out = []
        glob = x[self.glob_slice] if self.n_glob else None
        for gi, sl in enumerate(self.slices):
            coords = np.concatenate([x[sl], glob]) if self.n_glob else x[sl]
            for size, f0, stack, _ in self.gblocks[gi]:
                m = np.tensordot(coords, stack, axes=(0, 0))
                if with_const:
                    m = m + f0
                out.append(_herm(m))
        if self.tblocks:
            y = self.tail_weights(x)
            for size, f0, tpl, _ in self.tblocks:
                m = -np.tensordot(y, tpl, axes=(0, 0))
                if with_const:
                    m = m + f0
                out.append(_herm(m))
        return out

    def adjoint(self, mats: list) -> np.ndarray:
        """v_p = sum_b Re<F_{b,p}, M_b> over all blocks, in variable order."""
        out = np.zeros(self.n_vars)
        k = 0
        for gi, sl in enumerate(self.slices):
            tg = sl.stop - sl.start
            acc = np.zeros(tg + self.n_glob)
            for size, f0, stack, flat in self.gblocks[gi]:
                acc += np.real(flat.conj() @ mats[k].ravel())
                k += 1
            out[sl] += acc[:tg]
            if self.n_glob:
                out[self.glob_slice] += acc[tg:]
        if self.tblocks:
            w = np.zeros(self.n_templates)
            for size, f0, tpl, flat in self.tblocks:
                w += np.real(flat.conj() @ mats[k].ravel())
                k += 1
            for gi, sl in enumerate(self.slices):
                out[sl] -= self.map_adjoint(gi, w)
        return out


def _chol_spd(m: np.ndarray) -> np.ndarray:
    """Cholesky with escalating diagonal bumps near rank deficiency.

    Late interior-point iterations push the Schur blocks to the edge of
    positive definiteness at machine precision; a relative bump of 1e-14
    restores the factorization while the refinement pass in
    ``_SchurFactor.solve`` absorbs the perturbation.
    """
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        pass
    scale = float(np.max(np.diagonal(m).real))
    scale = scale if scale > 0 else 1.0
    eye = np.eye(m.shape[0])
    bump = 1e-14 * scale
    for _ in range(5):
        try:
            return np.linalg.cholesky(m + bump * eye)
        except np.linalg.LinAlgError:
            bump *= 1e3
    raise np.linalg.LinAlgError("Schur block stays indefinite under regularization")


class _SchurFactor:
    """Factorization of M = blockdiag(M_g) + P mhat P^T bordered by globals."""

    def __init__(self, prep: _Prep, works: list):
        self.prep = prep
        ng = prep.n_glob
        self.d_mats = []
        self.d_chol = []
        self.border = []
        dglob = np.zeros((ng, ng))
        k = 0
        for gi, sl in enumerate(prep.slices):
            tg = sl.stop - sl.start
            m_all = np.zeros((tg + ng, tg + ng))
            for size, f0, stack, flat in prep.gblocks[gi]:
                w = works[k]
                g = (w.winv @ stack) @ w.winv
                m_all += np.real(flat.conj() @ g.reshape(g.shape[0], -1).T)
                k += 1
            m_all = 0.5 * (m_all + m_all.T)
            self.d_mats.append(m_all[:tg, :tg])
            self.d_chol.append(_chol_spd(m_all[:tg, :tg]))
            self.border.append(m_all[:tg, tg:])
            dglob += m_all[tg:, tg:]
        self.dglob = dglob
        self.mhat = None
        if prep.tblocks:
            t = prep.n_templates
            mhat = np.zeros((t, t))
            for size, f0, tpl, flat in prep.tblocks:
                w = works[k]
                g = (w.winv @ tpl) @ w.winv
                mhat += np.real(flat.conj() @ g.reshape(g.shape[0], -1).T)
                k += 1
            self.mhat = 0.5 * (mhat + mhat.T)
            lm = _chol_spd(self.mhat)
            # low-rank factor Q per group and capacitance I + Q^T D^-1 Q
            self.q_parts = []
            cap = np.eye(t)
            for gi in range(len(prep.slices)):
                mg = prep.maps[gi]
                qg = lm if mg is None else mg.T @ lm
                dq = self._d_solve(gi, qg)
                cap += qg.T @ dq
                self.q_parts.append((qg, dq))
            self.cap_chol = _chol_spd(0.5 * (cap + cap.T))

    def _d_solve(self, gi: int, rhs: np.ndarray) -> np.ndarray:
        l = self.d_chol[gi]
        return np.linalg.solve(l.conj().T, np.linalg.solve(l, rhs))

    def _a_solve(self, v: np.ndarray) -> np.ndarray:
        """(blockdiag + P mhat P^T)^{-1} v by the inversion lemma."""
        prep = self.prep
        out = np.empty_like(v)
        for gi, sl in enumerate(prep.slices):
            out[sl] = self._d_solve(gi, v[sl])
        if self.mhat is None:
            return out
        qtu = np.zeros(prep.n_templates)
        for gi, sl in enumerate(prep.slices):
            qg, _ = self.q_parts[gi]
            qtu += qg.T @ out[sl]
        lc = self.cap_chol
        corr = np.linalg.solve(lc.T, np.linalg.solve(lc, qtu))
        for gi, sl in enumerate(prep.slices):
            _, dq = self.q_parts[gi]
            out[sl] -= dq @ corr
        return out

    def _solve_once(self, rhs: np.ndarray) -> np.ndarray:
        prep = self.prep
        ng = prep.n_glob
        nv = prep.n_vars - ng
        rv = rhs[:nv]
        if ng == 0:
            return self._a_solve(rv)
        rg = rhs[nv:]
        b_full = np.concatenate(self.border, axis=0)
        ainv_b = np.column_stack([self._a_solve(b_full[:, j]) for j in range(ng)])
        sglob = self.dglob - b_full.T @ ainv_b
        av = self._a_solve(rv)
        dg = np.linalg.solve(0.5 * (sglob + sglob.T), rg - b_full.T @ av)
        dv = self._a_solve(rv - b_full @ dg)
        return np.concatenate([dv, dg])

    def _matvec(self, v: np.ndarray) -> np.ndarray:
        prep = self.prep
        ng = prep.n_glob
        nv = prep.n_vars - ng
        vv = v[:nv]
        vg = v[nv:]
        out = np.empty(nv)
        for gi, sl in enumerate(prep.slices):
            out[sl] = self.d_mats[gi] @ vv[sl]
        if self.mhat is not None:
            y = np.zeros(prep.n_templates)
            for gi, sl in enumerate(prep.slices):
                y += prep.map_apply(gi, vv[sl])
            my = self.mhat @ y
            for gi, sl in enumerate(prep.slices):
                out[sl] += prep.map_adjoint(gi, my)
        gout = np.zeros(ng)
        for gi, sl in enumerate(prep.slices):
            if ng:
                out[sl] += self.border[gi] @ vg
                gout += self.border[gi].T @ vv[sl]
        if ng:
            gout = gout + self.dglob @ vg
        return np.concatenate([out, gout])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        sol = self._solve_once(rhs)
        # refine against the unregularized operator; the factorization carries
        # diagonal bumps late on and a single pass is not always enough
        target = 1e-13 * max(1.0, float(np.max(np.abs(rhs))))
        best = None
        for _ in range(6):
            res = rhs - self._matvec(sol)
            rnorm = float(np.max(np.abs(res)))
            if best is None or rnorm < best[0]:
                best = (rnorm, sol)
            if rnorm <= target or rnorm > best[0]:
                break
            sol = sol + self._solve_once(res)
        return best[1]


def _factor_point(w: _Work) -> None:
    """Cholesky both cones, then the scaling-point data from one SVD."""
    w.chol_s = np.linalg.cholesky(w.s)
    w.chol_z = np.linalg.cholesky(w.z)
    prod = w.chol_z.conj().T @ w.chol_s
    u, lam, vh = np.linalg.svd(prod)
    w.lam = lam
    t1 = np.linalg.solve(w.chol_s.conj().T, vh.conj().T)
    w.winv = _herm((t1 * lam) @ t1.conj().T)
    w.rn = (w.chol_s @ vh.conj().T) / np.sqrt(lam)
    w.rni = np.linalg.solve(w.rn, np.eye(w.size))


def _max_step(chol, direction) -> float:
    """Largest alpha with base + alpha * direction still PSD, from one eigensolve."""
    y = np.linalg.solve(chol, direction)
    y = np.linalg.solve(chol, y.conj().T).conj().T
    lo = float(np.linalg.eigvalsh(_herm(y))[0])
    if lo >= 0:
        return np.inf
    return -1.0 / lo


def solve_block_sdp(problem: BlockSdpProblem, tol_feas: float = EPS_FEAS,
                    tol_gap: float = EPS_GAP, max_iter: int = MAX_ITER,
                    verbose: bool = False) -> SdpSolution:
    """Run the interior-point iteration on a grouped block problem.

    Terminates 'optimal' when primal and dual residuals are below
    ``tol_feas`` and both the complementarity and the primal-dual value gap
    are below ``tol_gap``.  'numerical-limit' reports the best iterate when
    progress stalls or the iteration cap is reached; 'infeasible' is an
    extreme-divergence diagnosis, so near-boundary instances end up at
    'numerical-limit' rather than being misclassified.
    """
    prep = _Prep(problem)
    x = (
        np.array(problem.x0, dtype=float)
        if problem.x0 is not None
        else np.zeros(prep.n_vars)
    )
    if x.shape != (prep.n_vars,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({prep.n_vars},)")

    works = []
    consts = [f0 for blocks in prep.gblocks for _, f0, _, _ in blocks]
    consts += [f0 for _, f0, _, _ in prep.tblocks]
    for m in prep.forward(x, with_const=True):
        w = _Work(m.shape[0])
        lo = float(np.linalg.eigvalsh(m)[0])
        shift = 0.0 if lo > 1e-3 else 0.3 - min(lo, 0.0)
        w.s = m + shift * np.eye(w.size)
        w.z = np.eye(w.size, dtype=complex)
        works.append(w)

    best = None
    status = "numerical-limit"
    iterations = 0
    pval = dval = np.nan
    pinf = dinf = np.nan

    for iterations in range(1, max_iter + 1):
        try:
            for w in works:
                _factor_point(w)
        except np.linalg.LinAlgError:
            break
        mu = sum(float(np.sum(w.lam**2)) for w in works) / prep.total_dim

        gvals = prep.forward(x, with_const=True)
        for w, gv in zip(works, gvals):
            w.r1 = w.s - gv
        r2 = -prep.obj - prep.adjoint([w.z for w in works])

        pval = float(prep.obj @ x) + problem.obj_const
        dval = sum(
            float(np.real(np.vdot(f0, w.z))) for f0, w in zip(consts, works)
        ) + problem.obj_const
        pinf = max(float(np.max(np.abs(w.r1))) for w in works)
        dinf = float(np.max(np.abs(r2))) if r2.size else 0.0
        cgap = sum(float(np.sum(w.lam**2)) for w in works)

        score = max(pinf, dinf, cgap)
        if best is None or score < best[0]:
            best = (score, x.copy(), [w.s.copy() for w in works],
                    [w.z.copy() for w in works], pval, dval, pinf, dinf, iterations)

        if verbose:
            print(
                f"iter {iterations:3d}  mu {mu:9.2e}  pinf {pinf:9.2e}  "
                f"dinf {dinf:9.2e}  gap {abs(pval - dval):9.2e}"
            )
        if (
            pinf <= tol_feas
            and dinf <= tol_feas
            and cgap <= tol_gap
            and abs(pval - dval) <= tol_gap
        ):
            status = "optimal"
            break
        if iterations - best[8] > 30:
            break
        if abs(dval) > 1e8 and dinf <= tol_feas:
            status = "infeasible"
            break

        try:
            factor = _SchurFactor(prep, works)
        except np.linalg.LinAlgError:
            break

        def directions(rtilde: list) -> tuple:
            kmats = [
                _herm(w.winv @ (rt + w.r1) @ w.winv)
                for w, rt in zip(works, rtilde)
            ]
            rhs = prep.adjoint(kmats) - r2
            dx = factor.solve(rhs)
            dglin = prep.forward(dx, with_const=False)
            ds = [dl - w.r1 for dl, w in zip(dglin, works)]
            dz = [
                _herm(w.winv @ (rt - dsb) @ w.winv)
                for w, rt, dsb in zip(works, rtilde, ds)
            ]
            return dx, ds, dz

        # predictor: pure Newton step toward the boundary
        try:
            rt_aff = [-w.s for w in works]
            dx_a, ds_a, dz_a = directions(rt_aff)
            for w, dsb, dzb in zip(works, ds_a, dz_a):
                w.ds_aff = dsb
                w.dz_aff = dzb
            ap = min(1.0, min(_max_step(w.chol_s, w.ds_aff) for w in works))
            ad = min(1.0, min(_max_step(w.chol_z, w.dz_aff) for w in works))
            mu_aff = sum(
                float(
                    np.real(
                        np.vdot(w.s + ap * w.ds_aff, w.z + ad * w.dz_aff)
                    )
                )
                for w in works
            ) / prep.total_dim
            sigma = min(1.0, max((max(mu_aff, 0.0) / mu) ** 3, 0.0))

            # corrector: recenter to sigma * mu with the Mehrotra term
            rt = []
            for w in works:
                dsc = w.rni @ w.ds_aff @ w.rni.conj().T
                dzc = w.rn.conj().T @ w.dz_aff @ w.rn
                h = _herm(0.5 * (dsc @ dzc + dzc @ dsc))
                lam = w.lam
                r = -2.0 * h / np.add.outer(lam, lam)
                np.fill_diagonal(
                    r, (sigma * mu - lam**2 - np.diagonal(h).real) / lam
                )
                rt.append(_herm(w.rn @ r @ w.rn.conj().T))
            dx, ds, dz = directions(rt)
        except np.linalg.LinAlgError:
            break

        ap = min(1.0, STEP_FRACTION * min(_max_step(w.chol_s, dsb) for w, dsb in zip(works, ds)))
        ad = min(1.0, STEP_FRACTION * min(_max_step(w.chol_z, dzb) for w, dzb in zip(works, dz)))
        if ap <= 1e-10 and ad <= 1e-10:
            break
        x = x + ap * dx
        for w, dsb, dzb in zip(works, ds, dz):
            w.s = _herm(w.s + ap * dsb)
            w.z = _herm(w.z + ad * dzb)

    if status != "optimal" and best is not None:
        _, x, s_list, z_list, pval, dval, pinf, dinf, _ = best
        for w, s, z in zip(works, s_list, z_list):
            w.s = s
            w.z = z

    n_group_blocks = [len(blocks) for blocks in prep.gblocks]
    s_all = [w.s for w in works]
    z_all = [w.z for w in works]
    s_groups, z_groups = [], []
    k = 0
    for cnt in n_group_blocks:
        s_groups.append(s_all[k:k + cnt])
        z_groups.append(z_all[k:k + cnt])
        k += cnt
    return SdpSolution(
        status=status,
        primal_value=pval,
        dual_value=dval,
        gap=abs(pval - dval),
        iterations=iterations,
        x=x,
        group_slices=list(prep.slices),
        z_groups=z_groups,
        z_tail=z_all[k:],
        s_groups=s_groups,
        s_tail=s_all[k:],
        primal_residual=pinf,
        dual_residual=dinf,
    )
