"""POVMs in triple form, explicit constructions and verification.

Every element of a POVM acting on LDOI states can itself be taken LDOI
(twirling a measurement changes no discrimination probability against LDOI
states), so elements are stored as triples and completeness is a triple
identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import LdoiBasisSpec, basis_labels
from .states import Ensemble, product_basis_triple
from .triples import (
    ZERO_TOL,
    DimensionMismatch,
    LdoiTriple,
    hs_inner,
    identity_triple,
    is_ppt,
    is_psd,
    triple_from_json,
    triple_to_json,
    zero_triple,
)

__all__ = [
    "Povm",
    "PovmReport",
    "build_local_povm",
    "build_fourier_ppt_povm",
    "success_probability",
    "verify_povm",
    "povm_to_json",
    "povm_from_json",
]


class Povm:
    """Measurement with LDOI elements.

    ``class_tag`` records what the construction guarantees: 'local-product'
    for one-site product projectors, 'ppt' when every element is PPT by
    construction, 'unverified' otherwise.  Completeness (elements summing to
    the identity triple) is enforced at construction within ``tol``.
    """

    CLASSES = ("local-product", "ppt", "unverified")

    def __init__(self, elements, labels=None, class_tag: str = "unverified",
                 tol: float = ZERO_TOL):
        self.elements = list(elements)
        if not self.elements:
            raise ValueError("a POVM needs at least one element")
        if class_tag not in self.CLASSES:
            raise ValueError(f"unknown class tag {class_tag!r}")
        self.class_tag = class_tag
        n = self.elements[0].n
        total = zero_triple(n)
        for k, el in enumerate(self.elements):
            if el.n != n:
                raise DimensionMismatch(
                    f"element {k} has local dimension {el.n}, expected {n}"
                )
            total = total + el
        ident = identity_triple(n)
        dev = max(
            np.max(np.abs(total.a - ident.a)),
            np.max(np.abs(total.b - ident.b)),
            np.max(np.abs(total.c - ident.c)),
        )
        if dev > tol:
            raise ValueError(
                f"elements sum to the identity only within {dev:.3e} "
                f"(tolerance {tol:.1e})"
            )
        self.labels = list(labels) if labels is not None else list(range(len(self.elements)))
        if len(self.labels) != len(self.elements):
            raise ValueError(
                f"{len(self.labels)} labels for {len(self.elements)} elements"
            )

    @property
    def n(self) -> int:
        return self.elements[0].n

    def __len__(self) -> int:
        return len(self.elements)


def build_local_povm(spec: LdoiBasisSpec, permutation) -> Povm:
    """Product-projector measurement attaining the one-way LOCC bound.

    ``permutation`` assigns the diagonal labels: outcome (i, i) is the
    projector |s(i) s(i)><s(i) s(i)|.  Outcome (i, j) with i != j picks
    whichever of |ij><ij|, |ji><ji| matches the heavier amplitude; the
    partner label (j, i) takes the other one, so each pair splits exactly.
    Ties go to the vector's own slot (the >= branch).
    """
    n = spec.n
    sigma = np.asarray(permutation, dtype=int)
    if sorted(sigma.tolist()) != list(range(n)):
        raise ValueError(f"{sigma.tolist()} is not a permutation of 0..{n - 1}")
    elements = {}
    for i in range(n):
        elements[(i, i)] = product_basis_triple(n, int(sigma[i]), int(sigma[i]))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(spec.amp[i, j]) >= abs(spec.amp[j, i]):
                elements[(i, j)] = product_basis_triple(n, i, j)
                elements[(j, i)] = product_basis_triple(n, j, i)
            else:
                elements[(i, j)] = product_basis_triple(n, j, i)
                elements[(j, i)] = product_basis_triple(n, i, j)
    labels = basis_labels(n)
    return Povm([elements[lab] for lab in labels], labels, class_tag="local-product")


def build_fourier_ppt_povm(n: int) -> Povm:
    """PPT measurement for the Fourier basis with flat pair amplitudes, n >= 3.

    The n diagonal outcomes are zero; the outcome for label (i, j), i != j,
    has the triple entries

        a[i, j] = a[j, i] = 1/2,
        a[i, i] = a[j, j] = 1/(2n - 2),
        c[i, j] = c[j, i] = s / (2n - 2)   with s = +1 if i < j else -1,

    everything else zero.  Cross cancellation of the c entries makes the sum
    the identity, each element is PSD and PPT blockwise, every element is in
    fact separable (it is supported on a two-qubit cut and is PPT there), and
    the measurement succeeds with probability exactly 1/2 on the uniform
    basis ensemble.
    """
    if n < 3:
        raise ValueError(f"construction needs n >= 3, got {n}")
    w = 1.0 / (2 * n - 2)
    elements = []
    labels = basis_labels(n)
    for i, j in labels:
        if i == j:
            elements.append(zero_triple(n))
            continue
        a = np.zeros((n, n))
        a[i, j] = a[j, i] = 0.5
        a[i, i] = a[j, j] = w
        c = np.zeros((n, n))
        s = 1.0 if i < j else -1.0
        c[i, j] = c[j, i] = s * w
        c[i, i] = c[j, j] = w
        b = np.diag(np.diagonal(a)).astype(float)
        elements.append(LdoiTriple(a, b, c))
    return Povm(elements, labels, class_tag="ppt")


def success_probability(povm: Povm, ensemble: Ensemble) -> float:
    """Probability that outcome k fires on state k, elements paired with states in order."""
    if len(povm) != len(ensemble):
        raise ValueError(
            f"{len(povm)} outcomes cannot discriminate {len(ensemble)} states"
        )
    if povm.n != ensemble.n:
        raise DimensionMismatch(
            f"POVM lives on n={povm.n}, ensemble on n={ensemble.n}"
        )
    return float(
        sum(
            p * hs_inner(el, rho).real
            for p, el, rho in zip(ensemble.priors, povm.elements, ensemble.states)
        )
    )


@dataclass
class PovmReport:
    """Verification outcome; never raises, records everything it measured."""

    ok: bool
    completeness_residual: float
    min_eigenvalue: float
    min_pt_eigenvalue: float = None
    class_ok: bool = True
    failures: list = field(default_factory=list)


def verify_povm(povm: Povm, tol: float = 1e-8, required_class: str = None) -> PovmReport:
    """Check completeness, elementwise positivity, and a claimed class.

    ``required_class`` 'ppt' additionally tests the partial transpose of
    every element; 'local-product' checks each element is a single product
    projector or zero.  The report carries the worst values found.
    """
    n = povm.n
    ident = identity_triple(n)
    total = zero_triple(n)
    for el in povm.elements:
        total = total + el
    residual = max(
        np.max(np.abs(total.a - ident.a)),
        np.max(np.abs(total.b - ident.b)),
        np.max(np.abs(total.c - ident.c)),
    )
    failures = []
    if residual > tol:
        failures.append(f"completeness residual {residual:.3e}")

    min_eig = np.inf
    for k, el in enumerate(povm.elements):
        check = is_psd(el, tol)
        min_eig = min(min_eig, check.min_eigenvalue)
        if not check:
            failures.append(
                f"element {k} eigenvalue {check.min_eigenvalue:.3e} in block {check.block}"
            )

    min_pt = None
    class_ok = True
    if required_class == "ppt":
        min_pt = np.inf
        for k, el in enumerate(povm.elements):
            check = is_ppt(el, tol)
            min_pt = min(min_pt, check.min_eigenvalue)
            if not check:
                class_ok = False
                failures.append(
                    f"element {k} partial transpose eigenvalue "
                    f"{check.min_eigenvalue:.3e} in block {check.block}"
                )
        min_pt = float(min_pt)
    elif required_class == "local-product":
        for k, el in enumerate(povm.elements):
            ok_here = (
                np.max(np.abs(el.b - np.diag(np.diagonal(el.b)))) <= tol
                and np.max(np.abs(el.c - np.diag(np.diagonal(el.c)))) <= tol
                and np.all((np.abs(el.a) <= tol) | (np.abs(el.a - 1.0) <= tol))
                and np.sum(np.abs(el.a) > tol) <= 1
            )
            if not ok_here:
                class_ok = False
                failures.append(f"element {k} is not a product projector")
    elif required_class is not None:
        raise ValueError(f"unknown class {required_class!r}")

    return PovmReport(
        ok=not failures,
        completeness_residual=float(residual),
        min_eigenvalue=float(min_eig),
        min_pt_eigenvalue=min_pt,
        class_ok=class_ok,
        failures=failures,
    )


def povm_to_json(povm: Povm) -> dict:
    return {
        "class": povm.class_tag,
        "labels": [
            list(lab) if isinstance(lab, tuple) else lab for lab in povm.labels
        ],
        "elements": [triple_to_json(el) for el in povm.elements],
    }


def povm_from_json(d: dict) -> Povm:
    if "elements" not in d:
        raise ValueError("POVM JSON needs 'elements'")
    elements = [triple_from_json(el) for el in d["elements"]]
    labels = d.get("labels")
    if labels is not None:
        labels = [tuple(lab) if isinstance(lab, list) else lab for lab in labels]
    return Povm(elements, labels, class_tag=d.get("class", "unverified"))
