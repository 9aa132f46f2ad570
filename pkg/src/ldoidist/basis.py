"""Orthonormal bases of C^n (x) C^n whose projectors are all LDOI.

Such a basis is parameterized by a unitary u and an amplitude matrix amp:
the n vectors labeled (i, i) are sum_k u[i, k] |kk>, and each pair i < j
contributes the two vectors

    (i, j):  amp[i, j] |ij> + conj(amp[j, i]) |ji>
    (j, i):  amp[j, i] |ij> - conj(amp[i, j]) |ji>

which are orthonormal once |amp[i, j]|^2 + |amp[j, i]|^2 = 1.  The diagonal
of amp is unused.  Vectors are ordered with the n diagonal labels first and
the off-diagonal labels after them lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import Ensemble
from .triples import LdoiTriple, matrix_from_json, matrix_to_json

SPEC_TOL = 1e-10
RECOGNIZE_TOL = 1e-8

__all__ = [
    "SPEC_TOL",
    "RECOGNIZE_TOL",
    "NotLdoiBasis",
    "LdoiBasisSpec",
    "BasisVector",
    "basis_labels",
    "build_basis",
    "basis_vector_triple",
    "uniform_ensemble",
    "recognize_basis",
    "fourier_spec",
    "random_basis_spec",
    "basis_spec_to_json",
    "basis_spec_from_json",
    "basis_vectors_to_json",
    "basis_vectors_from_json",
]


class NotLdoiBasis(ValueError):
    """Vectors do not form an orthonormal basis of the LDOI-projector kind."""


class LdoiBasisSpec:
    """Parameters (u, amp) of an LDOI basis.

    u must be unitary and every off-diagonal pair of amp must satisfy
    |amp[i, j]|^2 + |amp[j, i]|^2 = 1, both within ``tol``.
    """

    __slots__ = ("u", "amp")

    def __init__(self, u, amp, tol: float = SPEC_TOL):
        u = np.asarray(u, dtype=complex)
        amp = np.asarray(amp, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"u must be square, got shape {u.shape}")
        if amp.shape != u.shape:
            raise ValueError(f"amp has shape {amp.shape}, expected {u.shape}")
        n = u.shape[0]
        dev = np.max(np.abs(u.conj().T @ u - np.eye(n)), initial=0.0)
        if dev > tol:
            raise ValueError(f"u fails unitarity by {dev:.3e} (tolerance {tol:.1e})")
        mags = np.abs(amp) ** 2
        norm_dev = np.abs(mags + mags.T - 1.0)
        np.fill_diagonal(norm_dev, 0.0)
        if norm_dev.max(initial=0.0) > tol:
            i, j = np.unravel_index(np.argmax(norm_dev), norm_dev.shape)
            raise ValueError(
                f"|amp[{i},{j}]|^2 + |amp[{j},{i}]|^2 = "
                f"{mags[i, j] + mags[j, i]:.12f}, expected 1 within {tol:.1e}"
            )
        self.u = u.copy()
        self.amp = amp.copy()

    @property
    def n(self) -> int:
        return self.u.shape[0]

    def __repr__(self) -> str:
        return f"LdoiBasisSpec(n={self.n})"


@dataclass
class BasisVector:
    """A basis vector: its (i, j) label and its dense length-n^2 amplitude vector."""

    label: tuple
    vec: np.ndarray

    @property
    def n(self) -> int:
        return round(len(self.vec) ** 0.5)


def basis_labels(n: int) -> list:
    """Label order used everywhere: (i, i) ascending, then (i, j) with i != j lexicographic."""
    labels = [(i, i) for i in range(n)]
    labels += [(i, j) for i in range(n) for j in range(n) if i != j]
    return labels


def build_basis(spec: LdoiBasisSpec) -> list:
    """All n^2 basis vectors of a spec, in :func:`basis_labels` order."""
    n = spec.n
    out = []
    for i, j in basis_labels(n):
        vec = np.zeros(n * n, dtype=complex)
        if i == j:
            for k in range(n):
                vec[k * n + k] = spec.u[i, k]
        else:
            p, q = min(i, j), max(i, j)
            sign = 1.0 if i < j else -1.0
            vec[p * n + q] = spec.amp[i, j]
            vec[q * n + p] = sign * np.conj(spec.amp[j, i])
        out.append(BasisVector((i, j), vec))
    return out


def basis_vector_triple(bv: BasisVector) -> LdoiTriple:
    """Rank-1 projector |v><v| of a basis vector, assembled directly as a triple."""
    n = bv.n
    i, j = bv.label
    a = np.zeros((n, n), dtype=complex)
    b = np.zeros((n, n), dtype=complex)
    c = np.zeros((n, n), dtype=complex)
    if i == j:
        w = np.array([bv.vec[k * n + k] for k in range(n)])
        b = np.outer(w, w.conj())
        np.fill_diagonal(a, np.diagonal(b))
        np.fill_diagonal(c, np.diagonal(b))
    else:
        p, q = min(i, j), max(i, j)
        alpha = bv.vec[p * n + q]
        beta = bv.vec[q * n + p]
        a[p, q] = abs(alpha) ** 2
        a[q, p] = abs(beta) ** 2
        c[p, q] = alpha * np.conj(beta)
        c[q, p] = np.conj(c[p, q])
    return LdoiTriple(a, b, c)


def uniform_ensemble(spec: LdoiBasisSpec) -> Ensemble:
    """The n^2 basis projectors with equal priors 1/n^2."""
    return Ensemble.uniform([basis_vector_triple(bv) for bv in build_basis(spec)])


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    # gauge: make the largest amplitude real positive; argmax takes the lowest index on ties
    mags = np.abs(vec)
    if mags.max() == 0:
        return vec.copy()
    pivot = vec[int(np.argmax(mags))]
    return vec * np.conj(pivot / abs(pivot))


def recognize_basis(vectors, tol: float = RECOGNIZE_TOL) -> LdoiBasisSpec:
    """Recover the (u, amp) parameters from an unlabeled orthonormal basis.

    Accepts raw vectors or :class:`BasisVector` objects; input labels are
    ignored and reassigned from the support patterns.  Each vector's global
    phase is fixed by making its largest amplitude real positive.  The
    recovered u is polished to an exact unitary, so building a basis from the
    result reproduces the input within a small multiple of ``tol``.

    Raises :class:`NotLdoiBasis` when the count is wrong, a vector has
    support off every admissible pattern, orthonormality fails, or the
    pattern census does not match (n diagonal vectors, two per pair).
    """
    vs = [np.asarray(getattr(v, "vec", v), dtype=complex).ravel() for v in vectors]
    if not vs:
        raise NotLdoiBasis("no vectors given")
    d = len(vs[0])
    n = round(d**0.5)
    if n * n != d:
        raise NotLdoiBasis(f"vector length {d} is not a perfect square")
    if len(vs) != d:
        raise NotLdoiBasis(f"got {len(vs)} vectors, need {d}")
    for k, v in enumerate(vs):
        if len(v) != d:
            raise NotLdoiBasis(f"vector {k} has length {len(v)}, expected {d}")

    gram = np.array([[np.vdot(x, y) for y in vs] for x in vs])
    gdev = np.max(np.abs(gram - np.eye(d)))
    if gdev > tol:
        raise NotLdoiBasis(f"orthonormality fails by {gdev:.3e} (tolerance {tol:.1e})")

    diag_idx = [k * n + k for k in range(n)]
    diag_set = set(diag_idx)
    diag_vecs = []
    pair_vecs: dict = {}
    for k, v in enumerate(vs):
        support = set(np.flatnonzero(np.abs(v) > tol).tolist())
        if support <= diag_set:
            diag_vecs.append(v)
            continue
        pairs = {(min(r // n, r % n), max(r // n, r % n)) for r in support}
        if len(pairs) == 1 and not (support & diag_set):
            pair_vecs.setdefault(pairs.pop(), []).append(v)
            continue
        raise NotLdoiBasis(
            f"vector {k} has support {sorted(support)} off every LDOI pattern"
        )
    if len(diag_vecs) != n:
        raise NotLdoiBasis(f"found {len(diag_vecs)} diagonal-type vectors, expected {n}")
    for pq, grp in pair_vecs.items():
        if len(grp) != 2:
            raise NotLdoiBasis(
                f"pair {pq} owns {len(grp)} vectors, expected exactly 2"
            )

    u = np.zeros((n, n), dtype=complex)
    for i, v in enumerate(diag_vecs):
        w = _fix_phase(v)
        u[i] = [w[k * n + k] for k in range(n)]
    # polish to an exact unitary; the input was tol-orthonormal so this moves it by O(tol)
    uu, _, vv = np.linalg.svd(u)
    u = uu @ vv

    amp = np.zeros((n, n), dtype=complex)
    for (p, q), (w1, w2) in sorted(pair_vecs.items()):
        w1 = _fix_phase(w1)
        amp[p, q] = w1[p * n + q]
        amp[q, p] = np.conj(w1[q * n + p])
        norm = np.sqrt(abs(amp[p, q]) ** 2 + abs(amp[q, p]) ** 2)
        amp[p, q] /= norm
        amp[q, p] /= norm
        predicted = np.zeros(d, dtype=complex)
        predicted[p * n + q] = amp[q, p]
        predicted[q * n + p] = -np.conj(amp[p, q])
        residual = 1.0 - abs(np.vdot(predicted, w2))
        if residual > 10 * tol:
            raise NotLdoiBasis(
                f"second vector of pair ({p},{q}) deviates from the forced "
                f"complement by {residual:.3e}"
            )
    return LdoiBasisSpec(u, amp, tol=max(SPEC_TOL, 10 * tol))


def fourier_spec(n: int, off_amp: complex = None) -> LdoiBasisSpec:
    """Fourier-matrix basis: u[j, k] = exp(2 pi i j k / n) / sqrt(n).

    Every off-diagonal amplitude is ``off_amp``, by default 1/sqrt(2); its
    squared magnitude must be 1/2 so the pair normalization holds.
    """
    if n < 2:
        raise ValueError(f"need local dimension at least 2, got {n}")
    if off_amp is None:
        off_amp = 1.0 / np.sqrt(2.0)
    if abs(2.0 * abs(off_amp) ** 2 - 1.0) > SPEC_TOL:
        raise ValueError(f"|off_amp|^2 must be 1/2, got {abs(off_amp) ** 2!r}")
    jk = np.outer(np.arange(n), np.arange(n))
    u = np.exp(2j * np.pi * jk / n) / np.sqrt(n)
    amp = np.full((n, n), complex(off_amp))
    np.fill_diagonal(amp, 0.0)
    return LdoiBasisSpec(u, amp)


def random_basis_spec(rng: np.random.Generator, n: int) -> LdoiBasisSpec:
    """Draw a random spec: u from a Haar-like QR draw, amplitudes uniform.

    For each pair i < j the squared magnitude |amp[i, j]|^2 is uniform on
    [0, 1] with |amp[j, i]|^2 complementary, and both phases are uniform.
    """
    if n < 2:
        raise ValueError(f"need local dimension at least 2, got {n}")
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    u = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    amp = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            t = rng.uniform()
            amp[i, j] = np.sqrt(t) * np.exp(2j * np.pi * rng.uniform())
            amp[j, i] = np.sqrt(1.0 - t) * np.exp(2j * np.pi * rng.uniform())
    return LdoiBasisSpec(u, amp)


def basis_spec_to_json(spec: LdoiBasisSpec) -> dict:
    return {"n": spec.n, "u": matrix_to_json(spec.u), "amp": matrix_to_json(spec.amp)}


def basis_spec_from_json(d: dict) -> LdoiBasisSpec:
    n = int(d["n"])
    u = matrix_from_json(d["u"])
    amp = matrix_from_json(d["amp"])
    if u.shape != (n, n) or amp.shape != (n, n):
        raise ValueError(f"matrices must be {n} x {n}")
    return LdoiBasisSpec(u, amp)


def basis_vectors_to_json(vectors) -> list:
    """Sparse JSON form: per vector its label and [index, [re, im]] amplitude pairs."""
    out = []
    for bv in vectors:
        amps = [
            [int(k), [float(bv.vec[k].real), float(bv.vec[k].imag)]]
            for k in np.flatnonzero(bv.vec != 0)
        ]
        out.append({"label": [int(bv.label[0]), int(bv.label[1])], "amplitudes": amps})
    return out


def basis_vectors_from_json(payload, n: int = None) -> list:
    if n is None:
        # infer the local dimension from the vector count
        n = round(len(payload) ** 0.5)
        if n * n != len(payload):
            raise ValueError(
                f"cannot infer dimension from {len(payload)} vectors; pass n"
            )
    out = []
    for item in payload:
        vec = np.zeros(n * n, dtype=complex)
        for k, (re, im) in item["amplitudes"]:
            k = int(k)
            if not 0 <= k < n * n:
                raise ValueError(f"amplitude index {k} out of range for n={n}")
            vec[k] = complex(re, im)
        label = tuple(int(x) for x in item["label"])
        out.append(BasisVector(label, vec))
    return out
