"""Scenario runner.

    dubois run <scenario-file> [--format text|json] [--out PATH]
    dubois selftest

A scenario is a flat ``key = value`` document::

    # smooth family, all checks
    model = smooth_plane
    D = 3
    p_min = -2
    checks = ses, subcomplex, assoc_graded, abs_to_rel, stationary, fiber_restriction

``model = custom`` additionally needs ``source = <path>`` pointing to a JSON
complex (see :func:`load_custom_bundle`).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .complexes import ChainMap, CochainComplex, ComplexError, complex_violation
from .dubois import (
    CheckReport,
    DuBoisTower,
    Finding,
    TowerError,
    WedgeOperator,
    abs_to_rel_triangles,
    build_tower,
    check_assoc_graded,
    filtered_map_levels,
    induce_tower_morphism,
    stationary_check,
    verify_functorial_diagram,
    verify_ses_tower,
    verify_subcomplex,
    wedge_violation,
)
from .filtered import FilteredComplex, FiltrationError, bete_filtration, filtration_violation
from .linalg import LinAlgError, RatMatrix
from .models import (
    ModelBundle,
    build_nodal_union_family,
    build_smooth_plane_family,
    fiber_restriction_smooth_check,
    normalization_morphism,
)

log = logging.getLogger(__name__)

MODELS = ("smooth_plane", "nodal_union", "custom")
CHECKS = ("ses", "subcomplex", "assoc_graded", "abs_to_rel", "stationary", "functorial",
          "fiber_restriction")
FORMATS = ("text", "json")
KEYS = ("model", "D", "p_min", "checks", "fiber_t0", "output", "format", "source")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ScenarioError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("\n".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class Scenario:
    model: str
    checks: tuple[str, ...]
    D: int = 2
    p_min: int = -1
    fiber_t0: Fraction | None = None
    output: str | None = None
    format: str = "text"
    source: str | None = None

    def echo(self) -> dict:
        return {
            "model": self.model,
            "D": self.D,
            "p_min": self.p_min,
            "checks": list(self.checks),
            "fiber_t0": None if self.fiber_t0 is None else str(self.fiber_t0),
            "format": self.format,
            "source": self.source,
        }


def parse_scenario(text: bytes | str) -> Scenario:
    """Parse and validate a scenario; every problem is reported with its line."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    problems: list[str] = []
    raw: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            problems.append(f"line {lineno}: unknown key '{key}'")
            continue
        if key in raw:
            problems.append(f"line {lineno}: duplicate key '{key}'")
            continue
        raw[key] = (lineno, value)

    def where(key: str) -> str:
        return f"line {raw[key][0]}" if key in raw else "scenario"

    vals: dict = {}

    def as_int(key: str) -> None:
        if key in raw:
            try:
                vals[key] = int(raw[key][1])
            except ValueError:
                problems.append(f"{where(key)}: {key} must be an integer, got '{raw[key][1]}'")

    as_int("D")
    as_int("p_min")
    if "fiber_t0" in raw:
        try:
            vals["fiber_t0"] = Fraction(raw["fiber_t0"][1])
        except (ValueError, ZeroDivisionError):
            problems.append(f"{where('fiber_t0')}: fiber_t0 must be a rational number")
    if "model" not in raw:
        problems.append("scenario: missing required key 'model'")
    elif raw["model"][1] not in MODELS:
        problems.append(f"{where('model')}: model must be one of {', '.join(MODELS)}")
    else:
        vals["model"] = raw["model"][1]
    if "format" in raw:
        if raw["format"][1] not in FORMATS:
            problems.append(f"{where('format')}: format must be text or json")
        else:
            vals["format"] = raw["format"][1]
    for key in ("output", "source"):
        if key in raw:
            vals[key] = raw[key][1]

    checks: list[str] = []
    if "checks" not in raw:
        problems.append("scenario: missing required key 'checks'")
    else:
        for item in (c.strip() for c in raw["checks"][1].split(",")):
            if not item:
                continue
            if item not in CHECKS:
                problems.append(f"{where('checks')}: unknown check '{item}'")
            elif item not in checks:
                checks.append(item)
        if not checks and not any(p.startswith(where("checks")) for p in problems):
            problems.append(f"{where('checks')}: checks must be nonempty")

    D = vals.get("D", 2)
    p_min = vals.get("p_min", -1)
    model = vals.get("model")
    if D < 2:
        problems.append(f"{where('D')}: D must be >= 2")
    if p_min > 0:
        problems.append(f"{where('p_min')}: p_min must be <= 0")
    if "stationary" in checks and p_min > -2:
        problems.append(f"{where('checks')}: stationary requires p_min <= -2")
    if "abs_to_rel" in checks and p_min > -1:
        problems.append(f"{where('checks')}: abs_to_rel requires p_min <= -1")
    if "fiber_restriction" in checks and model not in (None, "smooth_plane"):
        problems.append(f"{where('checks')}: fiber_restriction requires model = smooth_plane")
    if model == "custom" and "source" not in vals:
        problems.append(f"{where('model')}: model = custom requires a source file")
    if model not in (None, "custom") and "source" in vals:
        problems.append(f"{where('source')}: source is only valid with model = custom")
    if problems:
        raise ScenarioError(problems)
    return Scenario(model=model, checks=tuple(checks), D=D, p_min=p_min,
                    fiber_t0=vals.get("fiber_t0"), output=vals.get("output"),
                    format=vals.get("format", "text"), source=vals.get("source"))


# custom models ---------------------------------------------------------------


def _matrix(rows, nrows: int, ncols: int) -> RatMatrix:
    mat = RatMatrix.from_rows([[Fraction(x) for x in r] for r in rows], ncols) if rows else \
        RatMatrix.zeros(nrows, ncols)
    if mat.shape != (nrows, ncols):
        raise ComplexError(f"matrix has shape {mat.shape}, expected {(nrows, ncols)}")
    return mat


def load_custom_bundle(path: str | Path) -> tuple[ModelBundle | None, list[Finding]]:
    """Read a JSON complex.

    Keys: ``dims`` {degree: int}, ``d`` {degree: rows of fraction strings},
    optional ``levels`` {p: {degree: rows whose columns span F^p}} with ``n``
    (default: bete filtration), optional ``wedge`` {degree: rows} (default 0)
    and optional ``reference`` {p: {"dims": ..., "d": ...}} for assoc_graded.
    Returns the bundle, or ``None`` with the failed validation findings.
    """
    doc = json.loads(Path(path).read_text())
    dims = {int(m): int(k) for m, k in doc["dims"].items()}
    d = {int(m): _matrix(rows, dims.get(int(m) + 1, 0), dims[int(m)])
         for m, rows in doc.get("d", {}).items()}
    c = CochainComplex.build(dims, d)
    v = complex_violation(c)
    if v:
        return None, [Finding(0, False, "exact", f"validate_complex: {v}")]
    if "levels" in doc:
        levels = {int(p): {int(m): _matrix(rows, c.dim(int(m)), len(rows[0]) if rows else 0)
                           for m, rows in lv.items()}
                  for p, lv in doc["levels"].items()}
        F = FilteredComplex(c, levels, int(doc["n"]))
    else:
        F = bete_filtration(c)
    v = filtration_violation(F)
    if v:
        return None, [Finding(0, False, "exact", f"validate_filtration: {v}")]
    W = WedgeOperator(F, {int(m): _matrix(rows, c.dim(int(m) + 1), c.dim(int(m)))
                          for m, rows in doc.get("wedge", {}).items()})
    v = wedge_violation(W)
    if v:
        return None, [Finding(0, False, "exact", f"validate_wedge: {v}")]
    labels = {m: [f"e{m}_{i}" for i in range(c.dim(m))] for m in c.degrees}
    refs = {}
    for p, cx in doc.get("reference", {}).items():
        rdims = {int(m): int(k) for m, k in cx["dims"].items()}
        rd = {int(m): _matrix(rows, rdims.get(int(m) + 1, 0), rdims[int(m)])
              for m, rows in cx.get("d", {}).items()}
        refs[int(p)] = CochainComplex.build(rdims, rd, -1)
    return ModelBundle("custom", 0, F, W, refs, labels), []


# running ---------------------------------------------------------------------


@dataclass
class CheckEntry:
    name: str
    results: list[Finding]
    ms: float

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.results if not f.observed)


@dataclass
class Report:
    scenario: dict
    checks: list[CheckEntry] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if all(c.passed for c in self.checks) else "fail"

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.verdict == "pass" else EXIT_FAIL


def _build_bundle(s: Scenario) -> tuple[ModelBundle | None, list[Finding]]:
    if s.model == "smooth_plane":
        return build_smooth_plane_family(s.D), []
    if s.model == "nodal_union":
        return build_nodal_union_family(s.D), []
    return load_custom_bundle(s.source)


def _stationary(s: Scenario, t: DuBoisTower) -> CheckReport:
    rep = CheckReport("stationary")
    rep.add(-2, stationary_check(t), "exact",
            observed=s.model != "smooth_plane")
    return rep


def _functorial(s: Scenario, b: ModelBundle, t: DuBoisTower) -> CheckReport:
    if s.model == "nodal_union":
        X, Y, gamma = normalization_morphism(s.D)
        tX, tY = t, build_tower(Y.F, Y.W, s.p_min)
    else:
        tX = tY = t
        gamma = ChainMap.identity(b.F.ambient)
    levels = filtered_map_levels(gamma, tX, tY)
    return verify_functorial_diagram(induce_tower_morphism(levels, tX, tY), levels, tX, tY)


def _assoc(b: ModelBundle, t: DuBoisTower) -> CheckReport:
    return check_assoc_graded(t, b.reference(t.p_min), b.comparison_maps(t))


def run_scenario(s: Scenario) -> Report:
    report = Report(s.echo())
    start = time.perf_counter()
    try:
        bundle, problems = _build_bundle(s)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        bundle, problems = None, [Finding(0, False, "exact", f"load: {exc}")]
    if bundle is None:
        name = problems[0].detail.split(":", 1)[0] if problems else "load"
        report.checks.append(CheckEntry(name, problems, _ms(start)))
        return report
    try:
        tower = build_tower(bundle.F, bundle.W, s.p_min)
    except (TowerError, ComplexError, FiltrationError, LinAlgError) as exc:
        report.checks.append(CheckEntry("build_tower", [Finding(s.p_min, False, "exact", str(exc))],
                                        _ms(start)))
        return report

    runners: dict[str, Callable[[], CheckReport]] = {
        "ses": lambda: verify_ses_tower(tower),
        "subcomplex": lambda: verify_subcomplex(tower),
        "assoc_graded": lambda: _assoc(bundle, tower),
        "abs_to_rel": lambda: abs_to_rel_triangles(tower),
        "stationary": lambda: _stationary(s, tower),
        "functorial": lambda: _functorial(s, bundle, tower),
        "fiber_restriction": lambda: fiber_restriction_smooth_check(bundle, s.fiber_t0 or 0),
    }
    for name in s.checks:
        t0 = time.perf_counter()
        try:
            findings = runners[name]().findings
        except Exception as exc:  # verifier errors are data, not crashes
            log.debug("check %s raised", name, exc_info=True)
            findings = [Finding(s.p_min, False, "exact", f"{type(exc).__name__}: {exc}")]
        report.checks.append(CheckEntry(name, findings, _ms(t0)))
    return report


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000, 3)


def emit_report(r: Report, fmt: str = "text") -> bytes:
    if fmt == "json":
        doc = {
            "scenario": r.scenario,
            "checks": [
                {"name": c.name,
                 "results": [{"p": f.p, "status": f.status, "evidence": f.evidence}
                             for f in c.results],
                 "ms": c.ms}
                for c in r.checks
            ],
            "verdict": r.verdict,
        }
        return (json.dumps(doc, indent=2) + "\n").encode()
    sc = r.scenario
    lines = [f"scenario: model={sc['model']} D={sc['D']} p_min={sc['p_min']}",
             f"{'check':<18} {'p':>4}  {'status':<9} {'evidence':<11} detail"]
    for c in r.checks:
        for f in c.results:
            lines.append(f"{c.name:<18} {f.p:>4}  {f.status:<9} {f.evidence:<11} {f.detail}".rstrip())
        lines.append(f"{c.name:<18} {'':>4}  {'PASS' if c.passed else 'FAIL':<9} {c.ms:.1f} ms")
    lines.append(f"verdict: {r.verdict}")
    return ("\n".join(lines) + "\n").encode()


SELFTEST_SCENARIOS = (
    "model = smooth_plane\nD = 2\np_min = -2\n"
    "checks = ses, subcomplex, assoc_graded, abs_to_rel, stationary, functorial, fiber_restriction\n",
    "model = nodal_union\nD = 2\np_min = -1\n"
    "checks = ses, subcomplex, assoc_graded, abs_to_rel, functorial\n",
)


def selftest(out=sys.stdout) -> int:
    code = EXIT_PASS
    for text in SELFTEST_SCENARIOS:
        r = run_scenario(parse_scenario(text))
        out.write(emit_report(r).decode())
        if r.verdict != "pass":
            code = EXIT_FAIL
    return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="dubois", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario")
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--out")
    sub.add_parser("selftest", help="run the built-in invariant suite")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)

    if args.command == "selftest":
        return selftest()
    try:
        scenario = parse_scenario(Path(args.scenario).read_bytes())
    except OSError as exc:
        print(f"dubois: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        for problem in exc.problems:
            print(f"{args.scenario}: {problem}", file=sys.stderr)
        return EXIT_USAGE
    if scenario.source and not Path(scenario.source).is_absolute():
        scenario = Scenario(**{**scenario.__dict__,
                               "source": str(Path(args.scenario).parent / scenario.source)})
    report = run_scenario(scenario)
    data = emit_report(report, args.format or scenario.format)
    out = args.out or scenario.output
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
