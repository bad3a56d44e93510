"""Command-line entry point: verification suites and simulators with JSON reports."""
from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import click
import numpy as np

from .cech import (SCHEMA, ValidationReport, cocycle_from_json, suspension_cocycle, validate_all,
                   validate_differential_cocycle)
from .cmodules import (builtin_module, clifford_supertrace, equivariant_hom, exact_det,
                       extension_check, find_invertible, forget_f, map_to_json, module_power, module_sum,
                       module_tensor, morita_reduce, parity_reverse, random_equivariant, search_extension,
                       swap_witness)
from .clifford import generator_bound
from .errors import CliffkoError, ParseError
from .forms import integrate_full, mathai_quillen
from .scalars import I, Scalar, render
from .superconn import chern_form, external_product, suspension
from .superlinear import super_commutator


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float = 0.0
    tolerance: float = 0.0
    path: str = "exact"
    detail: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "status": "pass" if self.passed else "fail", "residual": self.residual,
               "tolerance": self.tolerance, "path": self.path}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class RunReport:
    command: str
    fixtures: list[str] = field(default_factory=list)
    checks: list[CheckResult] = field(default_factory=list)
    seed: int = 0
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, residual=0.0, tolerance=0.0, path="exact", detail=""):
        self.checks.append(CheckResult(name, bool(passed), float(residual), float(tolerance), path, detail))

    def absorb(self, rep: ValidationReport, prefix: str = ""):
        for r in rep.records:
            self.add(f"{prefix}{r.name}[{r.location}]", r.passed, r.residual, r.tolerance, r.path)

    def apply_strict(self):
        """Checks that could only be confirmed numerically count as failures."""
        for c in self.checks:
            if c.path == "numeric" and c.passed:
                c.passed = False
                c.detail = (c.detail + "; " if c.detail else "") + "numeric-only under --strict"

    def to_json(self) -> dict:
        # wall time is left out so that reports are byte-stable
        return {"schema": SCHEMA, "command": self.command, "fixtures": self.fixtures, "seed": self.seed,
                "passed": self.passed, "checks": [c.to_json() for c in self.checks]}

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f"  ({c.detail})" if c.detail else ""
            out.append(f"{status}  {c.name}  residual={c.residual:.3g} tol={c.tolerance:.3g} path={c.path}{extra}")
        return out


# --- suites ------------------------------------------------------------------------------------


def _scalar_check(report: RunReport, name: str, got: Scalar, want: Scalar):
    report.add(name, got == want, 0.0 if got == want else 1.0, 0.0, "exact",
               f"got {render(got)}, expected {render(want)}")


def trace_table_checks(seed: int = 0) -> list[tuple[str, Callable[[], Scalar], Scalar]]:
    """(name, computed value, expected value) for every supertrace identity in the table."""
    cl11 = builtin_module("cl11_r11")
    cl4 = builtin_module("cl4_quat")
    cl8 = builtin_module("cl8_oct")
    cl2 = builtin_module("cl2_complex")
    u = Scalar.u_power

    def supercommutator():
        M = module_sum(cl4, cl4)
        rng = np.random.default_rng(seed)
        S = random_equivariant(M, rng, parity=1)
        T = random_equivariant(M, rng, parity=1)
        return clifford_supertrace(M, super_commutator(S, T))

    def cl8_squared():
        with generator_bound(16):
            return clifford_supertrace(module_tensor(cl8, cl8))

    def reduced():
        X, _ = morita_reduce(cl11)
        return clifford_supertrace(X)

    return [
        ("str_cl11_identity", lambda: clifford_supertrace(cl11), Scalar.const(1)),
        ("str_cl4_identity", lambda: clifford_supertrace(cl4), u(-4, 2)),
        ("str_cl8_identity", lambda: clifford_supertrace(cl8), u(-8)),
        ("str_complex_cl2_identity", lambda: clifford_supertrace(cl2), I * u(-2)),
        ("str_cl4_squared", lambda: clifford_supertrace(module_tensor(cl4, cl4)), u(-8, 4)),
        ("str_cl8_fourfold_sum", lambda: clifford_supertrace(module_power(cl8, 4)), u(-8, 4)),
        ("str_cl11_times_cl4", lambda: clifford_supertrace(module_tensor(cl11, cl4)), u(-4, 2)),
        ("str_cl4_times_cl8", lambda: clifford_supertrace(module_tensor(cl4, cl8)), u(-12, 2)),
        ("str_cl8_squared", cl8_squared, u(-16)),
        ("str_parity_reversed_cl4", lambda: clifford_supertrace(parity_reverse(cl4)[0]), u(-4, -2)),
        ("str_morita_reduced_cl11", reduced, Scalar.const(1)),
        ("str_vanishes_on_supercommutator", supercommutator, Scalar.const(0)),
    ]


def cmd_trace_table(seed: int = 0, select: Sequence[str] | None = None,
                    corrupt: dict[str, Scalar] | None = None) -> RunReport:
    """Builtin Clifford supertraces and their product/periodicity identities, exactly.

    ``select`` restricts to the named checks (an empty selection runs nothing);
    ``corrupt`` replaces expected values, which is how the failure path is tested.
    """
    report = RunReport("trace-table", ["builtin modules"], seed=seed)
    for name, compute, want in trace_table_checks(seed):
        if select is not None and name not in select:
            continue
        if corrupt and name in corrupt:
            want = corrupt[name]
        _scalar_check(report, name, compute(), want)
    return report


def cmd_ko_ring(seed: int = 0) -> RunReport:
    """Witnesses for 2 eta = 0, eta^3 = 0, eta alpha = 0 and alpha^2 = 4 beta."""
    report = RunReport("ko-ring", ["builtin modules"], seed=seed)
    cl11 = builtin_module("cl11_r11")
    eta = forget_f(cl11)

    w = swap_witness(eta, cl11.rho[0])
    report.add("two_eta_swap_witness", extension_check(w), detail=json.dumps(map_to_json(w.extra)))

    cube = module_tensor(module_tensor(eta, eta), eta)
    w = search_extension(cube, 1)
    ok = w is not None and extension_check(w)
    report.add("eta_cubed_witness", ok, detail=json.dumps(map_to_json(w.extra)) if ok else "no witness found")

    ea = module_tensor(eta, builtin_module("cl4_quat"))
    X, _ = morita_reduce(ea)
    w = search_extension(X, 1)
    ok = w is not None and extension_check(w)
    report.add("eta_alpha_reduced_witness", ok, detail=json.dumps(map_to_json(w.extra)) if ok else "no witness found")

    cl4 = builtin_module("cl4_quat")
    src = module_tensor(cl4, cl4)
    dst = module_power(builtin_module("cl8_oct"), 4)
    basis = equivariant_hom(src, dst, 0)
    found = find_invertible(basis, seed=seed)
    if found is None:
        report.add("alpha_squared_four_beta_intertwiner", False, detail="no invertible map found")
    else:
        T, det, coeffs = found
        report.add("alpha_squared_four_beta_intertwiner", bool(det) and exact_det(T) == det,
                   detail=f"det={render(det)} coeffs={[str(c) for c in coeffs]}")
    return report


def cmd_suspension(n: int = 1, seed: int = 0, tolerance: float = 1e-8) -> RunReport:
    report = RunReport("suspension", [f"n={n}"], seed=seed)
    A = suspension(1)
    for _ in range(n - 1):
        A = external_product(A, suspension(1)).verify()
    got = chern_form(A)
    want = mathai_quillen(n)
    report.add("chern_equals_gaussian", got == want, 0.0 if got == want else 1.0, 0.0, "exact",
               f"Ch = {got}")
    norm = integrate_full(want)
    target = Scalar.sqrt2_power(n) * Scalar.monomial(1, p=n)
    report.add("normalization", norm == target, 0.0 if norm == target else 1.0, 0.0, "exact",
               f"integral = {render(norm)}, (2 pi)^(n/2) = {render(target)}")
    D = suspension_cocycle(n)
    report.add("global_form_is_gaussian", D.global_form == want)
    report.absorb(validate_differential_cocycle(D, tol=tolerance, seed=seed), "cocycle.")
    return report


def _load_json(path: str) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def cmd_cech_check(path: str, seed: int = 0, tolerance: float = 1e-8) -> RunReport:
    data = _load_json(path)
    D = cocycle_from_json(data)
    report = RunReport("cech-check", [str(path)], seed=seed)
    report.absorb(validate_all(D, tol=tolerance, seed=seed))
    return report


def cmd_index_sim(path: str, seed: int = 0, tolerance: float = 1e-10) -> RunReport:
    from .indexsim import (compare_cutoffs, cutoff_bundle, family_from_json, index_cocycle,
                           numeric_gluing_residuals, spectral_cover, validate_index_cocycle)

    data = _load_json(path)
    F = family_from_json(data)
    if "lambdas" not in data:
        raise ParseError(f"{path}: missing 'lambdas'")
    lams = [Fraction(x) for x in data["lambdas"]]
    report = RunReport("index-sim", [str(path)], seed=seed)
    for region in spectral_cover(F, lams):
        ranks = [b.rank for b in cutoff_bundle(F, region.lam, region)]
        report.add(f"rank_profile[lambda={region.lam}]", True, detail=f"ranks {ranks} on {len(ranks)} components")
    ic = index_cocycle(F, lams)
    report.absorb(validate_index_cocycle(ic, tol=max(tolerance, 1e-8)), "cocycle.")
    cover = ic.bundle.cover
    for sigma in cover.nerve:
        if len(sigma) != 2:
            continue
        lam, mu = lams[sigma[0]], lams[sigma[1]]
        for c, comp in enumerate(cover.components(sigma)):
            lo, hi = comp[0][0]
            res = numeric_gluing_residuals(F, lam, mu, (lo, hi))
            for key, val in res.items():
                report.add(f"gluing.{key}[{lam}<{mu} component={c}]", val <= tolerance, val, tolerance, "numeric")
    if "compare" in data:
        for label, ok in compare_cutoffs(F, lams, [Fraction(x) for x in data["compare"]]):
            report.add(f"stable_equivalence[{label}]", ok)
    return report


# --- click wiring ------------------------------------------------------------------------------


def _emit(report: RunReport, json_path: str | None, strict: bool, start: float) -> int:
    if strict:
        report.apply_strict()
    report.wall_time = time.perf_counter() - start
    for line in report.lines():
        click.echo(line)
    passed = sum(c.passed for c in report.checks)
    click.echo(f"{report.command}: {passed}/{len(report.checks)} checks passed in {report.wall_time:.2f}s")
    if json_path:
        Path(json_path).write_text(json.dumps(report.to_json(), indent=1, sort_keys=True) + "\n")
    return 0 if report.passed else 1


def _run(fn, json_path, strict, *args, **kwargs):
    start = time.perf_counter()
    try:
        report = fn(*args, **kwargs)
    except (ParseError, FileNotFoundError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except CliffkoError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    sys.exit(_emit(report, json_path, strict, start))


_common = [
    click.option("--seed", default=0, show_default=True, help="Seed for randomized checks."),
    click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the report as JSON."),
    click.option("--strict", is_flag=True, help="Fail checks confirmed only numerically."),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
def main():
    """Exact Clifford-module traces, superconnection forms and differential KO cocycles."""


@main.command("trace-table")
@common
@click.option("--select", multiple=True, help="Run only the named checks.")
@click.option("--none", "select_none", is_flag=True, help="Empty selection; produces an empty report.")
def trace_table(seed, json_path, strict, select, select_none):
    """Exact Clifford supertraces of the builtin modules and their identities."""
    chosen = [] if select_none else (list(select) or None)
    _run(cmd_trace_table, json_path, strict, seed=seed, select=chosen)


@main.command("ko-ring")
@common
def ko_ring(seed, json_path, strict):
    """Extension witnesses and the invertible intertwiner behind the KO-ring relations."""
    _run(cmd_ko_ring, json_path, strict, seed=seed)


@main.command("suspension")
@click.argument("n", type=click.IntRange(min=1))
@common
@click.option("--tolerance", default=1e-8, show_default=True, help="Tolerance for numeric checks.")
def suspension_cmd(n, seed, json_path, strict, tolerance):
    """Chern form, normalization and cocycle of the n-fold suspension superconnection."""
    _run(cmd_suspension, json_path, strict, n, seed=seed, tolerance=tolerance)


@main.command("cech-check")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@common
@click.option("--tolerance", default=1e-8, show_default=True, help="Tolerance for numeric checks.")
def cech_check(path, seed, json_path, strict, tolerance):
    """Validate a differential cocycle stored as JSON."""
    _run(cmd_cech_check, json_path, strict, path, seed=seed, tolerance=tolerance)


@main.command("index-sim")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@common
@click.option("--tolerance", default=1e-10, show_default=True, help="Tolerance for numeric gluing checks.")
def index_sim(path, seed, json_path, strict, tolerance):
    """Cutoff bundles and index cocycle of an operator family stored as JSON."""
    _run(cmd_index_sim, json_path, strict, path, seed=seed, tolerance=tolerance)


@main.command("all")
@common
@click.option("--tolerance", default=1e-8, show_default=True, help="Tolerance for numeric checks.")
def run_all(seed, json_path, strict, tolerance):
    """trace-table, ko-ring and suspension 1 in one report."""
    start = time.perf_counter()
    total = RunReport("all", seed=seed)
    for rep in (cmd_trace_table(seed), cmd_ko_ring(seed), cmd_suspension(1, seed, tolerance)):
        total.fixtures.extend(rep.fixtures)
        for c in rep.checks:
            c.name = f"{rep.command}.{c.name}"
            total.checks.append(c)
    sys.exit(_emit(total, json_path, strict, start))


if __name__ == "__main__":
    main()
