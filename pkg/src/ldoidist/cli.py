"""Command line front end.

Thin adapters over the library: build bases, compute bounds, run the PPT
solvers, construct and verify POVMs, emit named state families, reproduce
the package's golden examples, and run randomized consistency sweeps.  All
matrix input and output uses the package JSON formats.  Exit status is 0
when every check passes, 1 on a numerical failure, 2 on bad input.

Generator commands (``basis build``, ``povm local``, ``povm fourier``,
``state``) print the constructed object's JSON directly; analysis commands
print a human-readable report by default and a machine-readable one under
``--json``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .basis import (
    LdoiBasisSpec,
    basis_spec_from_json,
    basis_spec_to_json,
    basis_vectors_from_json,
    basis_vectors_to_json,
    build_basis,
    fourier_spec,
    random_basis_spec,
    recognize_basis,
    uniform_ensemble,
)
from .blocksdp import EPS_FEAS, EPS_GAP
from .bounds import (
    closed_form_large_u,
    gap_bound,
    locc_lower_bound,
    ppt_upper_bound_opt_c,
    ppt_upper_bound_weak,
    universal_lower_bound,
)
from .measurements import (
    build_fourier_ppt_povm,
    build_local_povm,
    povm_from_json,
    povm_to_json,
    success_probability,
    verify_povm,
)
from .sdp import (
    build_diagonal_certificate,
    check_dual_certificate,
    solve_ppt,
    unambiguous_ppt_feasible,
)
from .states import (
    ensemble_from_json,
    maximally_entangled_triple,
    product_basis_triple,
    werner_triple,
    x_state_triple,
)
from .triples import is_ppt, triple_from_json, triple_to_json

__all__ = ["main"]

REPRODUCE_IDS = (
    "bell",
    "product",
    "fourier-n3",
    "fourier-n4",
    "fourier-n5",
    "fourier-n6",
    "counterexample-3x3",
    "werner-ppt-threshold",
    "gap-table",
)


class CliInputError(Exception):
    """Bad file, malformed JSON, or invalid parameters; exits with status 2."""


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(f"{path} is not valid JSON: {exc}") from exc


def _write_or_print(payload, out: str):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _spec_from_args(args) -> LdoiBasisSpec:
    try:
        return basis_spec_from_json(_load_json(args.spec))
    except (ValueError, KeyError) as exc:
        raise CliInputError(f"bad basis spec: {exc}") from exc


def _ensemble_from_args(args):
    given = [name for name in ("ensemble", "spec") if getattr(args, name, None)]
    if len(given) != 1:
        raise CliInputError("provide exactly one of --ensemble or --spec")
    try:
        if args.ensemble:
            return ensemble_from_json(_load_json(args.ensemble))
        return uniform_ensemble(_spec_from_args(args))
    except (ValueError, KeyError) as exc:
        raise CliInputError(f"bad ensemble: {exc}") from exc


def _tolerances(args) -> dict:
    return {
        "tol_feas": args.tol_feas if args.tol_feas is not None else EPS_FEAS,
        "tol_gap": args.tol_gap if args.tol_gap is not None else EPS_GAP,
    }


def _report(args, command: str, inputs: dict, results: dict, checks: list,
            timings: dict = None) -> dict:
    rep = {
        "tool": "ldoidist",
        "version": __version__,
        "command": command,
        "input": inputs,
        "tolerances": _tolerances(args),
        "results": results,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
    if timings is not None:
        rep["timings"] = timings
    return rep


def _emit(rep: dict, args) -> bool:
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
        return rep["pass"]
    print(f"{rep['command']}  (ldoidist {rep['version']})")
    for key, val in rep["input"].items():
        print(f"  {key}: {val}")
    _print_block(rep["results"], indent=2)
    for chk in rep["checks"]:
        mark = "PASS" if chk["pass"] else "FAIL"
        detail = chk.get("detail", "")
        print(f"  [{mark}] {chk['name']}" + (f"  {detail}" if detail else ""))
    if "timings" in rep:
        for key, val in rep["timings"].items():
            print(f"  time {key}: {val:.3f} s")
    print("  result: " + ("ok" if rep["pass"] else "FAILED"))
    return rep["pass"]


def _print_block(results: dict, indent: int):
    pad = " " * indent
    for key, val in results.items():
        if isinstance(val, dict):
            print(f"{pad}{key}:")
            _print_block(val, indent + 2)
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            for row in val:
                cells = "  ".join(f"{k}={_cell(v)}" for k, v in row.items())
                print(f"{pad}{key}[{cells}]")
        else:
            print(f"{pad}{key}: {_cell(val)}")


def _cell(val) -> str:
    if isinstance(val, float):
        return f"{val:.12g}"
    return str(val)


def _check(name: str, ok: bool, detail: str = "") -> dict:
    chk = {"name": name, "pass": bool(ok)}
    if detail:
        chk["detail"] = detail
    return chk


def _close(name: str, value: float, target: float, tol: float) -> dict:
    dev = abs(value - target)
    return _check(name, dev <= tol, f"|{value:.12g} - {target:.12g}| = {dev:.2e}")


# ---------------------------------------------------------------------------
# basis


def _cmd_basis(args) -> bool:
    if args.basis_cmd == "build":
        spec = _spec_from_args(args)
        vectors = build_basis(spec)
        _write_or_print(basis_vectors_to_json(vectors), args.out)
        return True
    payload = _load_json(args.vectors)
    try:
        vectors = basis_vectors_from_json(payload)
        spec = recognize_basis(vectors, tol=args.tol_feas or 1e-8)
    except ValueError as exc:
        rep = _report(args, "basis check", {"vectors": args.vectors}, {},
                      [_check("vectors form an LDOI basis", False, str(exc))])
        return _emit(rep, args)
    rep = _report(
        args, "basis check", {"vectors": args.vectors},
        {"n": spec.n, "recognized_spec": basis_spec_to_json(spec)},
        [_check("vectors form an LDOI basis", True)],
    )
    return _emit(rep, args)


# ---------------------------------------------------------------------------
# bounds


def _bounds_results(spec: LdoiBasisSpec) -> dict:
    lb = locc_lower_bound(spec)
    weak = ppt_upper_bound_weak(spec)
    opt = ppt_upper_bound_opt_c(spec)
    closed = closed_form_large_u(spec)
    return {
        "locc_lb": lb.value,
        "ppt_ub_opt": opt.value,
        "ppt_ub_weak": weak.value,
        "closed_form": closed,
        "gap_bound": gap_bound(spec.n),
        "certificate_c": [float(x) for x in opt.certificate.c],
        "assignment": [int(x) for x in lb.permutation],
    }


def _cmd_bounds(args) -> bool:
    spec = _spec_from_args(args)
    t0 = time.perf_counter()
    results = _bounds_results(spec)
    dt = time.perf_counter() - t0
    order_ok = (
        results["locc_lb"] <= results["ppt_ub_opt"] + 1e-9
        and results["ppt_ub_opt"] <= results["ppt_ub_weak"] + 1e-9
    )
    rep = _report(
        args, "bounds", {"spec": args.spec}, results,
        [_check("lower bound does not exceed upper bounds", order_ok)],
        timings={"bounds": dt},
    )
    return _emit(rep, args)


# ---------------------------------------------------------------------------
# solve / certify


def _cmd_solve(args) -> bool:
    ens = _ensemble_from_args(args)
    tols = _tolerances(args)
    if args.solve_cmd == "ppt":
        t0 = time.perf_counter()
        res = solve_ppt(ens, tol_feas=tols["tol_feas"], tol_gap=tols["tol_gap"])
        dt = time.perf_counter() - t0
        chk = check_dual_certificate(ens, res.certificate, res.q_list)
        povm_rep = verify_povm(res.povm, tol=1e-6, required_class="ppt")
        if args.out_povm:
            _write_or_print(povm_to_json(res.povm), args.out_povm)
        rep = _report(
            args, "solve ppt",
            {"ensemble": args.ensemble or args.spec, "states": len(ens)},
            {
                "value": res.value,
                "status": res.status,
                "primal_value": res.solution.primal_value,
                "dual_value": res.solution.dual_value,
                "gap": res.solution.gap,
                "iterations": res.solution.iterations,
                "certificate_trace": float(res.certificate.trace().real),
            },
            [
                _check("solver converged", res.status == "optimal", res.status),
                _check("dual certificate verifies", chk.ok,
                       f"min eigenvalue {chk.min_eigenvalue:.2e}"),
                _check("POVM complete, PSD and PPT", povm_rep.ok and povm_rep.class_ok),
            ],
            timings={"solve": dt},
        )
        return _emit(rep, args)

    t0 = time.perf_counter()
    res = unambiguous_ppt_feasible(
        ens, tol_feas=tols["tol_feas"], tol_gap=tols["tol_gap"]
    )
    dt = time.perf_counter() - t0
    if args.out_povm and res.povm is not None:
        _write_or_print(povm_to_json(res.povm), args.out_povm)
    rep = _report(
        args, "solve unambiguous",
        {"ensemble": args.ensemble or args.spec, "states": len(ens)},
        {
            "feasible": res.feasible,
            "threshold": res.threshold,
            "status": res.status,
            "iterations": res.solution.iterations,
        },
        [_check("solver converged", res.status == "optimal", res.status)],
        timings={"solve": dt},
    )
    return _emit(rep, args)


def _cmd_certify(args) -> bool:
    ens = ensemble_from_json(_load_json(args.ensemble))
    payload = _load_json(args.h)
    try:
        if isinstance(payload, dict) and "h" in payload:
            h = triple_from_json(payload["h"])
            q_list = [triple_from_json(q) for q in payload.get("qs") or []] or None
        else:
            h = triple_from_json(payload)
            q_list = None
    except (ValueError, KeyError) as exc:
        raise CliInputError(f"bad certificate: {exc}") from exc
    tol = args.tol_feas if args.tol_feas is not None else 1e-7
    chk = check_dual_certificate(ens, h, q_list, tol=tol)
    rep = _report(
        args, "certify", {"h": args.h, "ensemble": args.ensemble},
        {
            "objective": chk.value,
            "min_eigenvalue": chk.min_eigenvalue,
            "worst_state": chk.worst_state,
        },
        [_check("certificate is dual feasible", chk.ok,
                f"min eigenvalue {chk.min_eigenvalue:.2e}")],
    )
    return _emit(rep, args)


# ---------------------------------------------------------------------------
# povm


def _parse_sigma(text: str, n: int) -> list:
    try:
        values = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise CliInputError(f"bad permutation {text!r}") from exc
    # a permutation of 0..n-1 contains 0, a permutation of 1..n contains n
    if 0 in values:
        sigma = values
    elif n in values:
        sigma = [v - 1 for v in values]
    else:
        raise CliInputError(f"{text!r} is not a permutation of n={n} labels")
    if sorted(sigma) != list(range(n)):
        raise CliInputError(f"{text!r} is not a permutation of n={n} labels")
    return sigma


def _cmd_povm(args) -> bool:
    if args.povm_cmd == "local":
        spec = _spec_from_args(args)
        sigma = _parse_sigma(args.sigma, spec.n)
        povm = build_local_povm(spec, sigma)
        _write_or_print(povm_to_json(povm), args.out)
        return True
    if args.povm_cmd == "fourier":
        if args.n < 3:
            raise CliInputError(f"the Fourier POVM needs n >= 3, got {args.n}")
        povm = build_fourier_ppt_povm(args.n)
        _write_or_print(povm_to_json(povm), args.out)
        return True

    try:
        povm = povm_from_json(_load_json(args.povm))
    except (ValueError, KeyError) as exc:
        raise CliInputError(f"bad POVM: {exc}") from exc
    if args.povm_cmd == "verify":
        tol = args.tol_feas if args.tol_feas is not None else 1e-8
        report = verify_povm(povm, tol=tol, required_class=args.required_class)
        results = {
            "completeness_residual": report.completeness_residual,
            "min_eigenvalue": report.min_eigenvalue,
            "failures": report.failures,
        }
        if report.min_pt_eigenvalue is not None:
            results["min_pt_eigenvalue"] = report.min_pt_eigenvalue
        rep = _report(
            args, "povm verify",
            {"povm": args.povm, "class": args.required_class or "(none)"},
            results,
            [_check("POVM verifies", report.ok and report.class_ok)],
        )
        return _emit(rep, args)

    ens = ensemble_from_json(_load_json(args.ensemble))
    value = success_probability(povm, ens)
    rep = _report(
        args, "povm score", {"povm": args.povm, "ensemble": args.ensemble},
        {"success_probability": value},
        [_check("probability in [0, 1]", -1e-12 <= value <= 1 + 1e-12)],
    )
    return _emit(rep, args)


# ---------------------------------------------------------------------------
# state


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise CliInputError(f"bad complex value {text!r}, expected 're' or 're,im'")


def _cmd_state(args) -> bool:
    try:
        if args.state_cmd == "werner":
            triple = werner_triple(args.n, args.p)
        elif args.state_cmd == "maxent":
            triple = maximally_entangled_triple(args.n)
        elif args.state_cmd == "product":
            triple = product_basis_triple(args.n, args.i, args.j)
        else:
            triple = x_state_triple(
                args.rho11, args.rho22, args.rho33, args.rho44,
                _parse_complex(args.rho14), _parse_complex(args.rho23),
            )
    except ValueError as exc:
        raise CliInputError(str(exc)) from exc
    _write_or_print(triple_to_json(triple), args.out)
    return True


# ---------------------------------------------------------------------------
# reproduce


def _bell_spec() -> LdoiBasisSpec:
    r = 1.0 / np.sqrt(2.0)
    return LdoiBasisSpec(
        np.array([[r, r], [r, -r]]), np.array([[0.0, r], [r, 0.0]])
    )


def _counterexample_spec() -> LdoiBasisSpec:
    amp = np.array([[0.0, 3, 3], [4, 0, 3], [4, 4, 0]]) / 5.0
    u = np.array([[2.0, -2, 1], [1, 2, 2], [2, 1, -2]]) / 3.0
    return LdoiBasisSpec(u, amp)


def _product_spec(n: int) -> LdoiBasisSpec:
    return LdoiBasisSpec(np.eye(n), np.triu(np.ones((n, n)), 1))


def _reproduce_basis_family(args, name, spec, target, checks, tols):
    """Shared shape of the basis-ensemble golden runs.

    ``target`` is the common golden value of every bound and of the SDP;
    extra family-specific checks arrive in ``checks``.
    """
    results = _bounds_results(spec)
    t0 = time.perf_counter()
    res = solve_ppt(uniform_ensemble(spec),
                    tol_feas=tols["tol_feas"], tol_gap=tols["tol_gap"])
    dt = time.perf_counter() - t0
    results.update({"opt_ppt_sdp": res.value, "sdp_status": res.status})
    checks = list(checks)
    checks.insert(0, _close("locc lower bound", results["locc_lb"], target, 1e-9))
    checks.insert(1, _close("optimized upper bound", results["ppt_ub_opt"], target, 1e-7))
    checks.insert(2, _close("PPT optimum (SDP)", res.value, target, 1e-6))
    checks.insert(3, _check("solver converged", res.status == "optimal", res.status))
    return _report(args, f"reproduce {name}", {"example": name}, results, checks,
                   timings={"solve": dt})


def _reproduce_bell(args, tols):
    spec = _bell_spec()
    closed = closed_form_large_u(spec)
    extra = [
        _close("closed form", closed, 0.5, 1e-12),
        _close("weak upper bound", ppt_upper_bound_weak(spec).value, 0.5, 1e-9),
    ]
    return _reproduce_basis_family(args, "bell", spec, 0.5, extra, tols)


def _reproduce_product(args, tols):
    spec = _product_spec(3)
    closed = closed_form_large_u(spec)
    res = unambiguous_ppt_feasible(spec and uniform_ensemble(spec))
    extra = [
        _close("closed form", closed, 1.0, 1e-12),
        _check("unambiguous discrimination feasible", res.feasible,
               f"threshold {res.threshold:.6f}"),
    ]
    return _reproduce_basis_family(args, "product", spec, 1.0, extra, tols)


def _reproduce_fourier(args, n, tols):
    spec = fourier_spec(n)
    target_lb = universal_lower_bound(n)
    povm = build_fourier_ppt_povm(n)
    povm_rep = verify_povm(povm, tol=1e-12, required_class="ppt")
    succ = success_probability(povm, uniform_ensemble(spec))
    results = _bounds_results(spec)
    t0 = time.perf_counter()
    res = solve_ppt(uniform_ensemble(spec),
                    tol_feas=tols["tol_feas"], tol_gap=tols["tol_gap"])
    dt = time.perf_counter() - t0
    results.update({"opt_ppt_sdp": res.value, "sdp_status": res.status,
                    "povm_success": succ})
    checks = [
        _close("locc lower bound", results["locc_lb"], target_lb, 1e-12),
        _check("explicit POVM is complete and PPT",
               povm_rep.ok and povm_rep.class_ok),
        _close("explicit POVM success", succ, 0.5, 1e-12),
        _close("PPT optimum (SDP)", res.value, 0.5, 1e-6),
        _check("solver converged", res.status == "optimal", res.status),
    ]
    return _report(args, f"reproduce fourier-n{n}", {"example": f"fourier-n{n}"},
                   results, checks, timings={"solve": dt})


def _reproduce_counterexample(args, tols):
    spec = _counterexample_spec()
    t0 = time.perf_counter()
    results = _bounds_results(spec)
    res = solve_ppt(uniform_ensemble(spec),
                    tol_feas=tols["tol_feas"], tol_gap=tols["tol_gap"])
    dt = time.perf_counter() - t0
    results.update({"opt_ppt_sdp": res.value, "sdp_status": res.status})
    h = build_diagonal_certificate(spec, np.asarray(results["certificate_c"]))
    cert = check_dual_certificate(uniform_ensemble(spec), h, tol=1e-9)
    checks = [
        _close("optimized upper bound", results["ppt_ub_opt"], 44 / 75, 1e-7),
        _check(
            "optimal c is (12/25, 12/25, 12/25)",
            max(abs(ci - 12 / 25) for ci in results["certificate_c"]) <= 1e-7,
        ),
        _close("PPT optimum (SDP)", res.value, 26 / 45, 1e-6),
        _check("solver converged", res.status == "optimal", res.status),
        _check("upper bound is not attained",
               results["ppt_ub_opt"] - res.value > 1e-3,
               f"gap {results['ppt_ub_opt'] - res.value:.6f}"),
        _check("diagonal certificate verifies", cert.ok,
               f"min eigenvalue {cert.min_eigenvalue:.2e}"),
        _close("locc lower bound", results["locc_lb"], (96 / 25 + 4 / 3) / 9, 1e-9),
        _close("weak upper bound", results["ppt_ub_weak"], 89 / 150, 1e-9),
        _check("closed form does not apply", results["closed_form"] is None),
        _check("runtime under 5 s", dt < 5.0, f"{dt:.2f} s"),
    ]
    return _report(args, "reproduce counterexample-3x3",
                   {"example": "counterexample-3x3"}, results, checks,
                   timings={"solve": dt})


def _ppt_threshold(n: int) -> float:
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if is_ppt(werner_triple(n, mid)):
            hi = mid
        else:
            lo = mid
    return hi


def _reproduce_werner(args, tols):
    results = {}
    checks = []
    for n in (3, 4):
        thr = _ppt_threshold(n)
        results[f"threshold_n{n}"] = thr
        checks.append(_close(f"PPT threshold at n={n}", thr, 0.5, 1e-6))
        checks.append(_check(
            f"sides of the threshold at n={n}",
            (not is_ppt(werner_triple(n, 0.4))) and is_ppt(werner_triple(n, 0.6)),
        ))
    return _report(args, "reproduce werner-ppt-threshold",
                   {"example": "werner-ppt-threshold"}, results, checks)


GAP_TABLE = {2: 0.0, 3: 1 / 18, 4: 1 / 16, 5: 3 / 50, 10: 1 / 25, 20: 9 / 400}


def _reproduce_gap_table(args, tols):
    rows = [
        {"n": n, "gap_bound": gap_bound(n), "expected": expected}
        for n, expected in sorted(GAP_TABLE.items())
    ]
    value, argmin = min((universal_lower_bound(n), n) for n in range(2, 51))
    results = {"rows": rows, "universal_minimum": value, "minimizing_n": argmin}
    checks = [
        _check("table reproduced",
               all(abs(r["gap_bound"] - r["expected"]) <= 1e-15 for r in rows)),
        _check("universal bound minimized at n=4 with value 7/16",
               argmin == 4 and abs(value - 7 / 16) <= 1e-15,
               f"minimum {value:.6f} at n={argmin}"),
    ]
    return _report(args, "reproduce gap-table", {"example": "gap-table"},
                   results, checks)


def _cmd_reproduce(args) -> bool:
    tols = _tolerances(args)
    name = args.example
    if name not in REPRODUCE_IDS:
        raise CliInputError(
            f"unknown example {name!r}; choose from {', '.join(REPRODUCE_IDS)}"
        )
    if name == "bell":
        rep = _reproduce_bell(args, tols)
    elif name == "product":
        rep = _reproduce_product(args, tols)
    elif name.startswith("fourier-n"):
        rep = _reproduce_fourier(args, int(name[len("fourier-n"):]), tols)
    elif name == "counterexample-3x3":
        rep = _reproduce_counterexample(args, tols)
    elif name == "werner-ppt-threshold":
        rep = _reproduce_werner(args, tols)
    else:
        rep = _reproduce_gap_table(args, tols)
    return _emit(rep, args)


# ---------------------------------------------------------------------------
# sweep


def _cmd_sweep(args) -> bool:
    if args.seed is None:
        raise CliInputError("sweep requires --seed for reproducibility")
    if args.n < 2:
        raise CliInputError(f"need n >= 2, got {args.n}")
    if args.count < 1:
        raise CliInputError(f"need a positive count, got {args.count}")
    tols = _tolerances(args)
    children = np.random.SeedSequence(args.seed).spawn(args.count)
    rows = []
    violations = 0
    for idx in range(args.count):
        spec = random_basis_spec(np.random.default_rng(children[idx]), args.n)
        lb = locc_lower_bound(spec).value
        opt = ppt_upper_bound_opt_c(spec).value
        weak = ppt_upper_bound_weak(spec).value
        closed = closed_form_large_u(spec)
        sdp = solve_ppt(uniform_ensemble(spec),
                        tol_feas=tols["tol_feas"], tol_gap=tols["tol_gap"])
        sandwich_ok = (
            lb <= sdp.value + 1e-7
            and sdp.value <= opt + 1e-7
            and opt <= weak + 1e-9
        )
        coincide_ok = True
        if closed is not None:
            quartet = (lb, sdp.value, opt, weak)
            coincide_ok = max(quartet) - min(quartet) <= 1e-6 and (
                abs(closed - sdp.value) <= 1e-6
            )
        row = {
            "index": idx,
            "locc_lb": lb,
            "opt_ppt_sdp": sdp.value,
            "ppt_ub_opt": opt,
            "ppt_ub_weak": weak,
            "closed_form": closed,
            "status": sdp.status,
            "ok": sandwich_ok and coincide_ok,
        }
        rows.append(row)
        if not row["ok"]:
            violations += 1
    closed_count = sum(1 for r in rows if r["closed_form"] is not None)
    results = {
        "n": args.n,
        "count": args.count,
        "seed": args.seed,
        "closed_form_applies": closed_count,
        "violations": violations,
        "rows": rows,
    }
    checks = [
        _check("sandwich and coincidence hold on every spec", violations == 0,
               f"{args.count - violations}/{args.count}"),
    ]
    # no timings here: repeated runs with one seed must emit identical bytes
    return _emit(_report(args, "sweep", {"generator": "ldoi-basis"},
                         results, checks), args)


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-feas", type=float, default=None,
                        help=f"feasibility tolerance (default {EPS_FEAS:g})")
    common.add_argument("--tol-gap", type=float, default=None,
                        help=f"optimality gap tolerance (default {EPS_GAP:g})")
    common.add_argument("--json", action="store_true",
                        help="emit a machine-readable report")
    common.add_argument("--seed", type=int, default=None,
                        help="random seed (required for sweep)")

    parser = argparse.ArgumentParser(
        prog="ldoidist",
        description="Distinguishability of locally diagonal orthogonally "
                    "invariant states under PPT and local measurements.",
    )
    parser.add_argument("--version", action="version",
                        version=f"ldoidist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_basis = sub.add_parser("basis", help="build or recognize LDOI bases")
    basis_sub = p_basis.add_subparsers(dest="basis_cmd", required=True)
    pb = basis_sub.add_parser("build", parents=[common],
                              help="expand a (U, A) spec into basis vectors")
    pb.add_argument("--spec", required=True, help="basis spec JSON file")
    pb.add_argument("--out", default=None, help="write vectors here instead of stdout")
    pc = basis_sub.add_parser("check", parents=[common],
                              help="test vectors for LDOI basis form and recover the spec")
    pc.add_argument("--vectors", required=True, help="basis vectors JSON file")

    p_bounds = sub.add_parser("bounds", parents=[common],
                              help="closed-form bounds for a basis spec")
    p_bounds.add_argument("--spec", required=True, help="basis spec JSON file")

    p_solve = sub.add_parser("solve", help="run the PPT discrimination SDPs")
    solve_sub = p_solve.add_subparsers(dest="solve_cmd", required=True)
    for sname, shelp in (("ppt", "optimal PPT discrimination"),
                         ("unambiguous", "unambiguous PPT feasibility")):
        ps = solve_sub.add_parser(sname, parents=[common], help=shelp)
        ps.add_argument("--ensemble", default=None, help="ensemble JSON file")
        ps.add_argument("--spec", default=None,
                        help="basis spec JSON file (uniform ensemble)")
        ps.add_argument("--out-povm", default=None,
                        help="write the measurement JSON here")

    p_cert = sub.add_parser("certify", parents=[common],
                            help="verify a dual certificate against an ensemble")
    p_cert.add_argument("--h", required=True,
                        help="certificate JSON: a triple, or {'h':..., 'qs':[...]}")
    p_cert.add_argument("--ensemble", required=True, help="ensemble JSON file")

    p_povm = sub.add_parser("povm", help="build, verify, or score measurements")
    povm_sub = p_povm.add_subparsers(dest="povm_cmd", required=True)
    pl = povm_sub.add_parser("local", parents=[common],
                             help="product measurement attaining the LOCC bound")
    pl.add_argument("--spec", required=True, help="basis spec JSON file")
    pl.add_argument("--sigma", required=True,
                    help="diagonal assignment, comma separated (0- or 1-based)")
    pl.add_argument("--out", default=None)
    pf = povm_sub.add_parser("fourier", parents=[common],
                             help="explicit PPT measurement for the Fourier family")
    pf.add_argument("--n", type=int, required=True)
    pf.add_argument("--out", default=None)
    pv = povm_sub.add_parser("verify", parents=[common])
    pv.add_argument("--povm", required=True, help="POVM JSON file")
    pv.add_argument("--class", dest="required_class", default=None,
                    choices=["ppt", "local-product"])
    pg = povm_sub.add_parser("score", parents=[common],
                             help="success probability of a POVM on an ensemble")
    pg.add_argument("--povm", required=True)
    pg.add_argument("--ensemble", required=True)

    p_state = sub.add_parser("state", help="named LDOI state families")
    state_sub = p_state.add_subparsers(dest="state_cmd", required=True)
    pw = state_sub.add_parser("werner", parents=[common])
    pw.add_argument("--n", type=int, required=True)
    pw.add_argument("--p", type=float, required=True)
    pw.add_argument("--out", default=None)
    pm = state_sub.add_parser("maxent", parents=[common])
    pm.add_argument("--n", type=int, required=True)
    pm.add_argument("--out", default=None)
    pp = state_sub.add_parser("product", parents=[common])
    pp.add_argument("--n", type=int, required=True)
    pp.add_argument("--i", type=int, required=True, help="first index, 0-based")
    pp.add_argument("--j", type=int, required=True, help="second index, 0-based")
    pp.add_argument("--out", default=None)
    px = state_sub.add_parser("xstate", parents=[common])
    for name in ("rho11", "rho22", "rho33", "rho44"):
        px.add_argument(f"--{name}", type=float, required=True)
    px.add_argument("--rho14", default="0", help="complex as 're' or 're,im'")
    px.add_argument("--rho23", default="0", help="complex as 're' or 're,im'")
    px.add_argument("--out", default=None)

    p_rep = sub.add_parser("reproduce", parents=[common],
                           help="rerun a named golden example")
    p_rep.add_argument("example", help=", ".join(REPRODUCE_IDS))

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="randomized consistency campaign over basis specs")
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--count", type=int, default=100)

    return parser


_HANDLERS = {
    "basis": _cmd_basis,
    "bounds": _cmd_bounds,
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "povm": _cmd_povm,
    "state": _cmd_state,
    "reproduce": _cmd_reproduce,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        ok = _HANDLERS[args.command](args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
