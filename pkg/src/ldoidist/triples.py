"""Matrix-triple representation of locally diagonal orthogonally invariant operators.

A bipartite operator on C^n (x) C^n is called locally diagonal orthogonally
invariant (LDOI) when its only nonzero matrix elements, in the product basis
|i>|k> with the row index i*n + k, sit at the positions

    (i k, i k)   weight a[i, k]      (the dense diagonal),
    (i i, j j)   weight b[i, j]      for i != j,
    (i j, j i)   weight c[i, j]      for i != j.

The three n x n matrices (a, b, c) share their diagonal: a[i, i] is the single
storage slot for the coefficient of |ii><ii|, so b and c carry the same values
on their diagonals by convention.  This module stores such operators as an
:class:`LdoiTriple` and implements the algebra that never leaves the triple
form: conversions to and from dense matrices, the twirl (entrywise projection)
onto the LDOI pattern, the partial transpose on the first tensor factor, the
block decomposition into one n x n block and n(n-1)/2 blocks of size 2x2, and
positivity tests that work block by block.

An LDOI operator is Hermitian exactly when a is real entrywise and b, c are
Hermitian.  The Hermitian LDOI operators form a real vector space of dimension
3n^2 - 2n.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

ZERO_TOL = 1e-10
PSD_TOL = 1e-10

__all__ = [
    "ZERO_TOL",
    "PSD_TOL",
    "DimensionMismatch",
    "NotHermitian",
    "NotLdoi",
    "LdoiTriple",
    "BlockDecomposition",
    "PsdResult",
    "identity_triple",
    "zero_triple",
    "hermitian_dimension",
    "triple_to_dense",
    "triple_from_dense",
    "ldoi_mask",
    "ldoi_twirl",
    "dense_partial_transpose",
    "partial_transpose",
    "block_decompose",
    "triple_from_blocks",
    "is_hermitian",
    "require_hermitian",
    "is_psd",
    "is_ppt",
    "hs_inner",
    "matrix_to_json",
    "matrix_from_json",
    "triple_to_json",
    "triple_from_json",
]


class DimensionMismatch(ValueError):
    """Operands live on tensor products of different local dimension."""


class NotHermitian(ValueError):
    """A Hermitian triple was required but the input is not one."""


class NotLdoi(ValueError):
    """A dense matrix has weight outside the LDOI positions."""


def hermitian_dimension(n: int) -> int:
    """Real dimension of the Hermitian LDOI operators on C^n (x) C^n."""
    return 3 * n * n - 2 * n


def _as_square(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


class LdoiTriple:
    """An LDOI operator stored as the coefficient matrices (a, b, c).

    The constructor copies its inputs to complex arrays and checks that the
    three diagonals agree within ``diag_tol``; the diagonals of b and c are
    then overwritten with the diagonal of a so the shared slot is stored once.
    """

    __slots__ = ("a", "b", "c")

    def __init__(self, a, b, c, diag_tol: float = ZERO_TOL):
        a = _as_square(a, "a")
        b = _as_square(b, "b")
        c = _as_square(c, "c")
        if not (a.shape == b.shape == c.shape):
            raise DimensionMismatch(
                f"triple matrices differ in shape: {a.shape}, {b.shape}, {c.shape}"
            )
        d = np.diagonal(a)
        mismatch = max(
            np.max(np.abs(np.diagonal(b) - d), initial=0.0),
            np.max(np.abs(np.diagonal(c) - d), initial=0.0),
        )
        if mismatch > diag_tol:
            raise ValueError(
                f"triple diagonals disagree by {mismatch:.3e} (tolerance {diag_tol:.1e})"
            )
        b = b.copy()
        c = c.copy()
        np.fill_diagonal(b, d)
        np.fill_diagonal(c, d)
        self.a = a.copy()
        self.b = b
        self.c = c

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def trace(self) -> complex:
        # dense trace is the sum of every a entry
        return complex(self.a.sum())

    def adjoint(self) -> "LdoiTriple":
        return LdoiTriple(self.a.conj(), self.b.conj().T, self.c.conj().T)

    def copy(self) -> "LdoiTriple":
        return LdoiTriple(self.a, self.b, self.c)

    def __add__(self, other: "LdoiTriple") -> "LdoiTriple":
        self._check_same(other)
        return LdoiTriple(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: "LdoiTriple") -> "LdoiTriple":
        self._check_same(other)
        return LdoiTriple(self.a - other.a, self.b - other.b, self.c - other.c)

    def __neg__(self) -> "LdoiTriple":
        return LdoiTriple(-self.a, -self.b, -self.c)

    def __mul__(self, scalar) -> "LdoiTriple":
        s = complex(scalar)
        return LdoiTriple(s * self.a, s * self.b, s * self.c)

    __rmul__ = __mul__

    def _check_same(self, other: "LdoiTriple") -> None:
        if not isinstance(other, LdoiTriple):
            raise TypeError(f"expected LdoiTriple, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatch(f"local dimensions differ: {self.n} vs {other.n}")

    def __repr__(self) -> str:
        return f"LdoiTriple(n={self.n})"


def identity_triple(n: int) -> LdoiTriple:
    """Triple of the identity on C^n (x) C^n: a is all ones, b = c = I."""
    return LdoiTriple(np.ones((n, n)), np.eye(n), np.eye(n))


def zero_triple(n: int) -> LdoiTriple:
    z = np.zeros((n, n))
    return LdoiTriple(z, z, z)


def triple_to_dense(t: LdoiTriple) -> np.ndarray:
    """Assemble the n^2 x n^2 matrix of a triple."""
    n = t.n
    m = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for k in range(n):
            m[i * n + k, i * n + k] = t.a[i, k]
    for i in range(n):
        for j in range(n):
            if i != j:
                m[i * n + i, j * n + j] = t.b[i, j]
                m[i * n + j, j * n + i] = t.c[i, j]
    return m


@functools.lru_cache(maxsize=None)
def ldoi_mask(n: int) -> np.ndarray:
    """Boolean n^2 x n^2 mask of the LDOI positions (read only, cached)."""
    mask = np.zeros((n * n, n * n), dtype=bool)
    for i in range(n):
        for j in range(n):
            mask[i * n + j, i * n + j] = True
            if i != j:
                mask[i * n + i, j * n + j] = True
                mask[i * n + j, j * n + i] = True
    mask.setflags(write=False)
    return mask


def _local_dim(m: np.ndarray) -> int:
    d = m.shape[0]
    n = round(d**0.5)
    if n * n != d:
        raise DimensionMismatch(f"matrix size {d} is not a perfect square")
    return n


def ldoi_twirl(m) -> np.ndarray:
    """Project a dense matrix onto the LDOI pattern by zeroing all other entries.

    This is the conditional expectation onto the LDOI operators: completely
    positive, trace preserving, unital, self adjoint and idempotent, and it
    commutes with the partial transpose.  In particular it maps states to
    states and preserves both positivity and the PPT property.
    """
    m = _as_square(m, "operator")
    n = _local_dim(m)
    return np.where(ldoi_mask(n), m, 0.0)


def triple_from_dense(m, tol: float = ZERO_TOL) -> LdoiTriple:
    """Extract the triple of a dense LDOI matrix.

    Raises :class:`NotLdoi` when any entry outside the LDOI pattern exceeds
    ``tol`` in magnitude, reporting the worst offender.  Use
    :func:`ldoi_twirl` first when deliberately projecting a general matrix.
    """
    m = _as_square(m, "operator")
    n = _local_dim(m)
    off = np.where(ldoi_mask(n), 0.0, m)
    worst = np.abs(off).max(initial=0.0)
    if worst > tol:
        r, s = np.unravel_index(np.argmax(np.abs(off)), off.shape)
        i, k = divmod(int(r), n)
        j, l = divmod(int(s), n)
        raise NotLdoi(
            f"entry ({i},{k}),({j},{l}) has magnitude {worst:.3e} outside the "
            f"LDOI pattern (tolerance {tol:.1e})"
        )
    a = np.empty((n, n), dtype=complex)
    b = np.empty((n, n), dtype=complex)
    c = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            a[i, j] = m[i * n + j, i * n + j]
            b[i, j] = m[i * n + i, j * n + j]
            c[i, j] = m[i * n + j, j * n + i]
    return LdoiTriple(a, b, c)


def dense_partial_transpose(m) -> np.ndarray:
    """Partial transpose of a dense bipartite matrix on the first factor."""
    m = _as_square(m, "operator")
    n = _local_dim(m)
    return (
        m.reshape(n, n, n, n).transpose(2, 1, 0, 3).reshape(n * n, n * n)
    )


def partial_transpose(t: LdoiTriple) -> LdoiTriple:
    """Partial transpose on the first factor, computed in triple form.

    The LDOI pattern is invariant under the operation and the triple maps as
    (a, b, c) -> (a, c^T, b^T): transposition swaps the |ii><jj| weights with
    the |ij><ji| weights.  Involutive, and shares no work with the dense path.
    """
    return LdoiTriple(t.a, t.c.T, t.b.T)


@dataclass
class BlockDecomposition:
    """Direct-sum pieces of an LDOI operator.

    ``diagonal_block`` is the n x n matrix b acting on span{|ii>}.  For each
    pair i < j, ``pair_blocks[(i, j)]`` is the 2 x 2 matrix
    [[a_ij, c_ij], [c_ji, a_ji]] acting on span{|ij>, |ji>}.  The operator is
    the direct sum of these blocks, so spectra and positivity reduce to them.
    """

    diagonal_block: np.ndarray
    pair_blocks: dict

    def eigenvalues(self) -> np.ndarray:
        """Sorted eigenvalues of the whole operator (requires Hermitian blocks)."""
        vals = [np.linalg.eigvalsh(self.diagonal_block)]
        for blk in self.pair_blocks.values():
            vals.append(np.linalg.eigvalsh(blk))
        return np.sort(np.concatenate(vals))


def block_decompose(t: LdoiTriple) -> BlockDecomposition:
    n = t.n
    pair = {}
    for i in range(n):
        for j in range(i + 1, n):
            pair[(i, j)] = np.array(
                [[t.a[i, j], t.c[i, j]], [t.c[j, i], t.a[j, i]]], dtype=complex
            )
    return BlockDecomposition(t.b.copy(), pair)


def triple_from_blocks(diagonal_block, pair_blocks: dict) -> LdoiTriple:
    """Inverse of :func:`block_decompose`."""
    b = _as_square(diagonal_block, "diagonal_block")
    n = b.shape[0]
    a = np.zeros((n, n), dtype=complex)
    c = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(a, np.diagonal(b))
    for (i, j), blk in pair_blocks.items():
        if not (0 <= i < j < n):
            raise ValueError(f"pair block key {(i, j)} out of range for n={n}")
        blk = np.asarray(blk, dtype=complex)
        if blk.shape != (2, 2):
            raise ValueError(f"pair block {(i, j)} has shape {blk.shape}, expected (2, 2)")
        a[i, j] = blk[0, 0]
        a[j, i] = blk[1, 1]
        c[i, j] = blk[0, 1]
        c[j, i] = blk[1, 0]
    np.fill_diagonal(c, np.diagonal(b))
    return LdoiTriple(a, b, c)


def is_hermitian(t: LdoiTriple, tol: float = ZERO_TOL) -> bool:
    dev = max(
        np.max(np.abs(t.a.imag), initial=0.0),
        np.max(np.abs(t.b - t.b.conj().T), initial=0.0),
        np.max(np.abs(t.c - t.c.conj().T), initial=0.0),
    )
    return bool(dev <= tol)


def require_hermitian(t: LdoiTriple, tol: float = ZERO_TOL) -> None:
    """Raise :class:`NotHermitian` with the worst offending entry."""
    dev_a = np.abs(t.a.imag)
    dev_b = np.abs(t.b - t.b.conj().T)
    dev_c = np.abs(t.c - t.c.conj().T)
    worst = max(dev_a.max(initial=0.0), dev_b.max(initial=0.0), dev_c.max(initial=0.0))
    if worst <= tol:
        return
    for name, dev in (("a", dev_a), ("b", dev_b), ("c", dev_c)):
        if dev.max(initial=0.0) == worst:
            i, j = np.unravel_index(np.argmax(dev), dev.shape)
            raise NotHermitian(
                f"matrix {name} fails Hermiticity at ({i},{j}) by {worst:.3e} "
                f"(tolerance {tol:.1e})"
            )


@dataclass
class PsdResult:
    """Outcome of a blockwise positivity test, truthy when it passed.

    ``block`` names where the minimum eigenvalue was found: ("diagonal",) for
    the n x n block, ("pair", i, j) for a 2 x 2 block.
    """

    ok: bool
    min_eigenvalue: float
    block: tuple

    def __bool__(self) -> bool:
        return self.ok


def is_psd(t: LdoiTriple, tol: float = PSD_TOL) -> PsdResult:
    """Blockwise positive semidefiniteness, down to -tol on the spectrum.

    The n x n diagonal block goes through an eigensolver; each 2 x 2 pair
    block uses the closed form for its smallest eigenvalue.
    """
    require_hermitian(t)
    n = t.n
    min_eig = float(np.linalg.eigvalsh(t.b)[0]) if n > 0 else 0.0
    where = ("diagonal",)
    for i in range(n):
        for j in range(i + 1, n):
            p = t.a[i, j].real
            q = t.a[j, i].real
            lo = 0.5 * (p + q) - np.hypot(0.5 * (p - q), abs(t.c[i, j]))
            if lo < min_eig:
                min_eig = float(lo)
                where = ("pair", i, j)
    return PsdResult(min_eig >= -tol, min_eig, where)


def is_ppt(t: LdoiTriple, tol: float = PSD_TOL) -> PsdResult:
    """Positivity of the partial transpose; block labels refer to the transposed operator."""
    return is_psd(partial_transpose(t), tol)


def hs_inner(x: LdoiTriple, y: LdoiTriple) -> complex:
    """Hilbert-Schmidt inner product tr(x^dagger y), conjugate linear in x."""
    x._check_same(y)
    od = ~np.eye(x.n, dtype=bool)
    return complex(
        np.vdot(x.a, y.a) + np.vdot(x.b[od], y.b[od]) + np.vdot(x.c[od], y.c[od])
    )


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    entries = [[float(z.real), float(z.imag)] for z in m.ravel()]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": entries}


def matrix_from_json(d: dict) -> np.ndarray:
    rows, cols = int(d["rows"]), int(d["cols"])
    entries = d["entries"]
    if len(entries) != rows * cols:
        raise ValueError(
            f"matrix payload has {len(entries)} entries, expected {rows * cols}"
        )
    flat = np.array([complex(re, im) for re, im in entries])
    if not np.all(np.isfinite(flat)):
        raise ValueError("matrix payload contains non-finite entries")
    return flat.reshape(rows, cols)


def triple_to_json(t: LdoiTriple) -> dict:
    return {
        "n": t.n,
        "a": matrix_to_json(t.a),
        "b": matrix_to_json(t.b),
        "c": matrix_to_json(t.c),
    }


def triple_from_json(d: dict) -> LdoiTriple:
    n = int(d["n"])
    a = matrix_from_json(d["a"])
    b = matrix_from_json(d["b"])
    c = matrix_from_json(d["c"])
    for name, m in (("a", a), ("b", b), ("c", c)):
        if m.shape != (n, n):
            raise ValueError(f"matrix {name} has shape {m.shape}, expected ({n}, {n})")
    return LdoiTriple(a, b, c)
