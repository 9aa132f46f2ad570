"""Named LDOI state families and ensembles of them.

All constructors return :class:`~ldoidist.triples.LdoiTriple` densities with
unit trace.  Indices are 0 based throughout.
"""

from __future__ import annotations

import numpy as np

from .triples import (
    ZERO_TOL,
    DimensionMismatch,
    LdoiTriple,
    is_hermitian,
    is_psd,
    triple_from_json,
    triple_to_json,
)

__all__ = [
    "Ensemble",
    "werner_triple",
    "maximally_entangled_triple",
    "product_basis_triple",
    "x_state_triple",
    "ensemble_to_json",
    "ensemble_from_json",
]


class Ensemble:
    """States with prior probabilities, the input to every discrimination task.

    Checks at construction: priors nonnegative and summing to 1 within 1e-12,
    every state Hermitian, PSD and of unit trace within ``tol``.
    """

    def __init__(self, states, priors, tol: float = ZERO_TOL):
        self.states = list(states)
        self.priors = np.asarray(priors, dtype=float)
        if len(self.states) == 0:
            raise ValueError("ensemble needs at least one state")
        if self.priors.shape != (len(self.states),):
            raise ValueError(
                f"got {len(self.states)} states but priors of shape {self.priors.shape}"
            )
        if np.any(self.priors < 0):
            raise ValueError("priors must be nonnegative")
        if abs(self.priors.sum() - 1.0) > 1e-12:
            raise ValueError(f"priors sum to {self.priors.sum()!r}, expected 1")
        n = self.states[0].n
        for k, rho in enumerate(self.states):
            if rho.n != n:
                raise DimensionMismatch(
                    f"state {k} has local dimension {rho.n}, expected {n}"
                )
            if not is_hermitian(rho, tol):
                raise ValueError(f"state {k} is not Hermitian within {tol:.1e}")
            check = is_psd(rho, tol)
            if not check:
                raise ValueError(
                    f"state {k} has eigenvalue {check.min_eigenvalue:.3e} in "
                    f"block {check.block}"
                )
            if abs(rho.trace() - 1.0) > tol:
                raise ValueError(f"state {k} has trace {rho.trace():.12f}")

    @property
    def n(self) -> int:
        return self.states[0].n

    def __len__(self) -> int:
        return len(self.states)

    @classmethod
    def uniform(cls, states, tol: float = ZERO_TOL) -> "Ensemble":
        states = list(states)
        return cls(states, np.full(len(states), 1.0 / len(states)), tol)


def werner_triple(n: int, p: float) -> LdoiTriple:
    """Werner state with weight p on the symmetric subspace.

    The density is p times the normalized symmetric projector plus (1 - p)
    times the normalized antisymmetric one.  Its partial transpose has the
    eigenvalue (2p - 1)/n on the maximally entangled direction, so the state
    is PPT exactly when p >= 1/2.
    """
    if n < 2:
        raise ValueError(f"need local dimension at least 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"weight p={p} outside [0, 1]")
    alpha = p / (n * (n + 1)) + (1 - p) / (n * (n - 1))
    beta = p / (n * (n + 1)) - (1 - p) / (n * (n - 1))
    a = alpha * np.ones((n, n)) + beta * np.eye(n)
    b = (alpha + beta) * np.eye(n)
    c = beta * np.ones((n, n)) + alpha * np.eye(n)
    return LdoiTriple(a, b, c)


def maximally_entangled_triple(n: int) -> LdoiTriple:
    """Projector onto (1/sqrt(n)) sum_i |ii>, as a triple."""
    if n < 1:
        raise ValueError(f"need local dimension at least 1, got {n}")
    return LdoiTriple(np.eye(n) / n, np.ones((n, n)) / n, np.eye(n) / n)


def product_basis_triple(n: int, i: int, j: int) -> LdoiTriple:
    """The computational product state |ij><ij| (0-based indices)."""
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"indices ({i}, {j}) out of range for n={n}")
    a = np.zeros((n, n))
    a[i, j] = 1.0
    d = np.diag(np.diagonal(a))
    return LdoiTriple(a, d, d)


def x_state_triple(rho11, rho22, rho33, rho44, rho14, rho23) -> LdoiTriple:
    """Two-qubit X state from its nonzero 4 x 4 entries (1-based positions).

    The diagonal is (rho11, rho22, rho33, rho44); rho14 couples |00> with
    |11> and rho23 couples |01> with |10>.  Unit trace and Hermitian
    positions are required; positivity is left to the caller.
    """
    diag = np.array([rho11, rho22, rho33, rho44], dtype=complex)
    if np.max(np.abs(diag.imag)) > ZERO_TOL:
        raise ValueError("diagonal entries must be real")
    if abs(diag.real.sum() - 1.0) > ZERO_TOL:
        raise ValueError(f"diagonal sums to {diag.real.sum()!r}, expected 1")
    a = np.array([[rho11, rho22], [rho33, rho44]], dtype=complex)
    b = np.array([[rho11, rho14], [np.conj(rho14), rho44]], dtype=complex)
    c = np.array([[rho11, rho23], [np.conj(rho23), rho44]], dtype=complex)
    return LdoiTriple(a, b, c)


def ensemble_to_json(e: Ensemble) -> dict:
    return {
        "priors": [float(p) for p in e.priors],
        "states": [triple_to_json(t) for t in e.states],
    }


def ensemble_from_json(d: dict) -> Ensemble:
    if "states" not in d or "priors" not in d:
        raise ValueError("ensemble JSON needs 'states' and 'priors'")
    states = [triple_from_json(t) for t in d["states"]]
    return Ensemble(states, d["priors"])
