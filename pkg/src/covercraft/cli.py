"""Scenario runner: load a model, run a task, emit reports and DOT files.

Scenario files are line-oriented text with exact rationals.  Grammar
(blank lines and # comments ignored; one directive per line):

    task check|cover|basis|sublattice|norm|gh|demo
    seed 0

    model grid                # a registry name from covercraft.models
    # or an inline model:
    voltage free 1 moduli 30  # moduli list may be empty
    vertex v
    edge v v 1 (0,1)          # tail head length voltage
    action rank 2
    gen perm id tau v:(0,1)   # perm id | a>b,b>a ; tau vertex:(..);vertex:(..)
    basepoint v (0,0)

    gens l1_ball 2            # | displacement_ball 3/2 | explicit (1,0) ...
    param r 3/2               # task parameters, exact rationals
    param M 2
    param word_radius 2
    param D 1
    param K 8
    param g (1,1)
    param r_volume 100
    param norm l1             # l1 | l2 | linf | action
    param C 0
    param samples 64
    param tol 1e-6
    param subgroup (2,0) (0,2)

    space A 0 1 ; 1 0         # gh task: matrix rows separated by ;
    space B 0 2 ; 2 0
    quotient A subgroup (0,1) # gh alternative: quotient of the model

Exit codes: 0 success, 2 certificate failure, 3 model invalid, 4 resource
budget exceeded, 5 parse error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import models as model_registry
from .abelian import WordSet, sumset_power
from .errors import (
    CertificateError,
    CovercraftError,
    ModelInvalidError,
    ResourceBudgetError,
    ScenarioParseError,
)
from .ghspace import FiniteMetricSpace, gh_distance_exact, quotient_space
from .monodromy import (
    MonodromyInput,
    build_cover_group,
    build_cover_window,
    check_conditions,
    covering_verdict,
    label_collisions,
    verify_local_homeomorphism,
)
from .periodic import LatticeAction, PeriodicGraph, VoltageGroup, quotient_diameter
from .reports import Report, dot_window, fmt_value, parse_vector
from .shortbasis import gromov_short_basis, milnor_svarc_generators, verify_separation
from .stable import (
    analytic_norm_model,
    asymptotic_volume_estimate,
    cs_sublattice,
    john_transform,
    norm_model_from_action,
    stable_norm_estimate,
)

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_MODEL = 3
EXIT_BUDGET = 4
EXIT_PARSE = 5

TASKS = ("check", "cover", "basis", "sublattice", "norm", "gh", "demo")


class Scenario:
    def __init__(self):
        self.task = None
        self.seed = 0
        self.model_name = None
        self.voltage = None
        self.vertices = []
        self.edges = []
        self.action_rank = None
        self.gen_specs = []
        self.basepoint = None
        self.gens_spec = None
        self.params = {}
        self.spaces = {}
        self.quotients = {}

    # -- model construction ------------------------------------------------

    def build_model(self):
        if self.model_name is not None:
            try:
                return model_registry.build(self.model_name)
            except KeyError as e:
                raise ScenarioParseError(str(e)) from None
        if self.voltage is None or not self.vertices or self.action_rank is None:
            raise ScenarioParseError("scenario has no model")
        group = VoltageGroup(*self.voltage)
        pg = PeriodicGraph(group, self.vertices, self.edges)
        gens = []
        for perm_spec, tau_spec in self.gen_specs:
            perm = {}
            if perm_spec != "id":
                for piece in perm_spec.split(","):
                    a, _, b = piece.partition(">")
                    perm[a] = b
            tau = {}
            if tau_spec:
                for piece in tau_spec.split(";"):
                    v, _, off = piece.partition(":")
                    try:
                        tau[v] = parse_vector(off)
                    except ValueError as e:
                        raise ScenarioParseError(f"bad tau entry {piece!r}: {e}") from None
            gens.append((perm, tau))
        if len(gens) != self.action_rank:
            raise ScenarioParseError(
                f"action rank {self.action_rank} but {len(gens)} generators")
        return pg, LatticeAction(pg, gens)

    def build_basepoint(self, pg):
        if self.basepoint is None:
            return pg.basepoint()
        name, off = self.basepoint
        return (name, pg.group.canon(off))

    def build_gens(self, pg, action, basepoint):
        if self.gens_spec is None:
            raise ScenarioParseError("task needs a `gens` directive")
        kind, args = self.gens_spec
        if kind == "l1_ball":
            return WordSet.l1_ball(action.rank, int(args[0]))
        if kind == "displacement_ball":
            return milnor_svarc_generators(action, basepoint, Fraction(args[0]))
        if kind == "explicit":
            return WordSet.from_iter(action.rank, [parse_vector(a) for a in args])
        raise ScenarioParseError(f"unknown gens kind {kind!r}")

    def fraction(self, key, default=None):
        if key not in self.params:
            if default is None:
                raise ScenarioParseError(f"missing parameter {key!r}")
            return Fraction(default)
        return Fraction(self.params[key])

    def integer(self, key, default=None):
        if key not in self.params:
            if default is None:
                raise ScenarioParseError(f"missing parameter {key!r}")
            return int(default)
        return int(self.params[key])


def parse_scenario(path):
    sc = Scenario()
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ScenarioParseError(f"cannot read scenario: {e}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            _parse_line(sc, line)
        except ScenarioParseError:
            raise
        except Exception as e:
            raise ScenarioParseError(f"{path}:{lineno}: {e}") from None
    if sc.task is None:
        raise ScenarioParseError("scenario has no task")
    return sc


def _parse_line(sc, line):
    words = line.split()
    head = words[0]
    if head == "task":
        if words[1] not in TASKS:
            raise ScenarioParseError(f"unknown task {words[1]!r}")
        sc.task = words[1]
    elif head == "seed":
        sc.seed = int(words[1])
    elif head == "model":
        sc.model_name = words[1]
    elif head == "voltage":
        # voltage free K moduli [m1 m2 ...]
        free = int(words[words.index("free") + 1])
        moduli = []
        if "moduli" in words:
            moduli = [int(x) for x in words[words.index("moduli") + 1:]]
        sc.voltage = (free, tuple(moduli))
    elif head == "vertex":
        sc.vertices.extend(words[1:])
    elif head == "edge":
        tail, head_v, length = words[1], words[2], Fraction(words[3])
        sc.edges.append((tail, head_v, length, parse_vector(words[4])))
    elif head == "action":
        sc.action_rank = int(words[words.index("rank") + 1])
    elif head == "gen":
        perm_spec = words[words.index("perm") + 1]
        tau_spec = words[words.index("tau") + 1] if "tau" in words else ""
        sc.gen_specs.append((perm_spec, tau_spec))
    elif head == "basepoint":
        sc.basepoint = (words[1], parse_vector(words[2]))
    elif head == "gens":
        sc.gens_spec = (words[1], words[2:])
    elif head == "param":
        if words[1] == "subgroup" or words[1] == "g":
            sc.params[words[1]] = words[2:] if words[1] == "subgroup" else words[2]
        else:
            sc.params[words[1]] = words[2]
    elif head == "space":
        name = words[1]
        rows = " ".join(words[2:]).split(";")
        matrix = [[Fraction(x) for x in row.split()] for row in rows]
        sc.spaces[name] = matrix
    elif head == "quotient":
        name = words[1]
        sub = [parse_vector(w) for w in words[words.index("subgroup") + 1:]
               if w.startswith("(")]
        window = None
        if "window" in words:
            window = Fraction(words[words.index("window") + 1])
        sc.quotients[name] = (sub, window)
    else:
        raise ScenarioParseError(f"unknown directive {head!r}")


# -- task runners ------------------------------------------------------------


def _monodromy_input(sc, pg, action, basepoint):
    gens = sc.build_gens(pg, action, basepoint)
    return MonodromyInput(pg, action, basepoint, sc.fraction("r"),
                          gens, sc.integer("M", 1))


def run_check(sc, outdir, stem):
    pg, action = sc.build_model()
    p = sc.build_basepoint(pg)
    inp = _monodromy_input(sc, pg, action, p)
    rep = check_conditions(inp)
    report = Report("check")
    report.add("task", "check")
    report.add("radius", inp.radius)
    report.add("gens_size", len(inp.gens))
    report.add("power", inp.power)
    report.add("cond_i", rep.cond_i)
    report.add("cond_ii", rep.cond_ii)
    report.add("cond_iii", rep.cond_iii)
    for name in ("cond_i", "cond_ii", "cond_iii"):
        if name in rep.witnesses:
            w = rep.witnesses[name]
            report.add(f"{name}_witness_element", w["element"])
            if "vertex" in w:
                report.add(f"{name}_witness_vertex", w["vertex"])
    for k, v in sorted(rep.diagnostics.items()):
        report.add(f"diag_{k}", v)
    return report, {}


def run_cover(sc, outdir, stem):
    pg, action = sc.build_model()
    p = sc.build_basepoint(pg)
    inp = _monodromy_input(sc, pg, action, p)
    rep = check_conditions(inp)
    group = build_cover_group(inp)
    verdict = covering_verdict(inp, group)
    word_radius = sc.integer("word_radius", 2)
    window = build_cover_window(inp, group, word_radius)
    local = verify_local_homeomorphism(window, inp)
    collisions = label_collisions(window)

    report = Report("cover")
    report.add("task", "cover")
    report.add("cond_i", rep.cond_i)
    report.add("cond_ii", rep.cond_ii)
    report.add("cond_iii", rep.cond_iii)
    report.add("group_free_rank", group.free_rank)
    report.add("group_torsion", list(group.torsion))
    report.add("ker_free_rank", verdict.ker_free_rank)
    report.add("ker_torsion", list(verdict.ker_torsion))
    report.add("is_homeomorphism", verdict.is_homeomorphism)
    report.add("sheet_class", verdict.sheet_class)
    if verdict.criterion_evidence.get("violator_word") is not None:
        report.add("criterion_violator_word",
                   [list(x) for x in verdict.criterion_evidence["violator_word"]])
    report.add("window_word_radius", word_radius)
    report.add("window_classes", len(window.classes))
    report.add("window_edges", len(window.edges))
    report.add("window_label_collisions", len(collisions))
    report.add("local_homeo_status", local.status)
    report.add("local_homeo_components", local.component_count)
    report.add("local_homeo_complete", local.complete_components)
    if local.witness is not None:
        report.add("local_homeo_witness", local.witness)
    artifacts = {f"{stem}.window.dot": dot_window(window)}
    return report, artifacts


def run_basis(sc, outdir, stem):
    pg, action = sc.build_model()
    p = sc.build_basepoint(pg)
    D = sc.fraction("D")
    result = gromov_short_basis(action, p, D)
    report = Report("basis")
    report.add("task", "basis")
    report.add("separation", result.separation)
    report.add("basis", [tuple(b) for b in result.basis])
    report.add("displacements", list(result.displacements))
    report.add("certificate", [tuple(c) for c in result.separation_certificate])
    report.add("iterations", len(result.iteration_log))
    for i, entry in enumerate(result.iteration_log):
        report.add(f"iter_{i}_witness", entry["witness"])
        report.add(f"iter_{i}_doublings", entry["doublings"])
        report.add(f"iter_{i}_close_before", entry["close_before"])
        report.add(f"iter_{i}_close_after", entry["close_after"])
    report.add("boundary_ties", [t[0] for t in result.boundary_ties])
    return report, {}


def run_sublattice(sc, outdir, stem):
    pg, action = sc.build_model()
    p = sc.build_basepoint(pg)
    D = sc.fraction("D")
    kind = sc.params.get("norm", "action")
    C = sc.params.get("C")
    if kind == "action":
        nm = norm_model_from_action(action, p, K=sc.integer("K", 8),
                                    C=Fraction(C) if C is not None else None)
    else:
        nm = analytic_norm_model(kind, action.rank, C=Fraction(C) if C is not None else 0)
    jt = john_transform(nm, samples=sc.integer("samples", 64),
                        tol=float(sc.params.get("tol", 1e-6)), seed=sc.seed)
    cert = cs_sublattice(nm, D, john=jt, action=action, basepoint=p)
    qd = quotient_diameter(pg, action, cert.basis)
    report = Report("sublattice")
    report.add("task", "sublattice")
    report.add("n", cert.n)
    report.add("D", cert.D)
    report.add("C", cert.C)
    report.add("M", cert.M)
    report.add("D_prime", cert.D_prime)
    report.add("basis", [tuple(b) for b in cert.basis])
    report.add("rounding_errors", [repr(e) for e in cert.rounding_errors])
    report.add("rounding_bound", cert.rounding_bound)
    report.add("box_separation_ok", cert.box_separation_ok)
    report.add("tail_bound", cert.tail_bound)
    report.add("displacement_ok", cert.displacement_ok)
    report.add("quotient_diameter", qd.diameter if qd.finite else "infinite")
    report.add("quotient_within_D_prime",
               bool(qd.finite and qd.diameter <= cert.D_prime))
    return report, {}


def run_norm(sc, outdir, stem):
    pg, action = sc.build_model()
    p = sc.build_basepoint(pg)
    g = parse_vector(sc.params.get("g", "(1,0)"))
    K = sc.integer("K", 8)
    upper, gap = stable_norm_estimate(action, p, g, K)
    report = Report("norm")
    report.add("task", "norm")
    report.add("g", g)
    report.add("K", K)
    report.add("upper", upper)
    report.add("gap", gap)
    if "r_volume" in sc.params:
        r = sc.fraction("r_volume")
        est = asymptotic_volume_estimate(action, p, action.rank, r)
        report.add("volume_radius", r)
        report.add("volume_estimate", est)
    return report, {}


def run_gh(sc, outdir, stem):
    spaces = {}
    for name, matrix in sc.spaces.items():
        spaces[name] = FiniteMetricSpace.from_rows(matrix)
    if sc.quotients:
        pg, action = sc.build_model()
        p = sc.build_basepoint(pg)
        for name, (sub, window) in sc.quotients.items():
            spaces[name] = quotient_space(pg, action, sub, window_radius=window,
                                          basepoint=p)
    if len(spaces) < 2:
        raise ScenarioParseError("gh task needs two spaces")
    names = sorted(spaces)
    report = Report("gh")
    report.add("task", "gh")
    for name in names:
        report.add(f"space_{name}_size", len(spaces[name]))
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            d = gh_distance_exact(spaces[a], spaces[b])
            report.add(f"gh_{a}_{b}", d)
    return report, {}


def pipeline_torus_demo(model, D, basepoint=None):
    """Short basis, then the quotient diameter it certifies: the desk
    pipeline from separation target to diameter bound."""
    pg, action = model
    p = basepoint if basepoint is not None else pg.basepoint()
    result = gromov_short_basis(action, p, Fraction(D))
    qd = quotient_diameter(pg, action, result.basis)
    ok, witness, cert = verify_separation(action, p, result.basis, Fraction(D))
    report = Report("demo")
    report.add("task", "demo")
    report.add("D", Fraction(D))
    report.add("basis", [tuple(b) for b in result.basis])
    report.add("displacements", list(result.displacements))
    report.add("separation_ok", ok)
    report.add("certificate", [tuple(c) for c in cert])
    report.add("quotient_diameter", qd.diameter if qd.finite else "infinite")
    report.add("quotient_classes", qd.class_count)
    return report


def run_demo(sc, outdir, stem):
    pg, action = sc.build_model()
    p = sc.build_basepoint(pg)
    report = pipeline_torus_demo((pg, action), sc.fraction("D"), basepoint=p)
    return report, {}


RUNNERS = {
    "check": run_check,
    "cover": run_cover,
    "basis": run_basis,
    "sublattice": run_sublattice,
    "norm": run_norm,
    "gh": run_gh,
    "demo": run_demo,
}


def run_scenario_file(path, outdir, budget=None):
    """Run one scenario; returns the exit code and writes artifacts."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(path).stem
    try:
        sc = parse_scenario(path)
        report, artifacts = RUNNERS[sc.task](sc, outdir, stem)
    except ScenarioParseError as e:
        _write_failure(outdir, stem, "parse_error", e)
        return EXIT_PARSE
    except CertificateError as e:
        _write_failure(outdir, stem, "certificate_failure", e)
        return EXIT_CERTIFICATE
    except ResourceBudgetError as e:
        _write_failure(outdir, stem, "resource_budget", e)
        return EXIT_BUDGET
    except ModelInvalidError as e:
        _write_failure(outdir, stem, "model_invalid", e)
        return EXIT_MODEL
    report.write(outdir / f"{stem}.report.txt")
    for name, content in artifacts.items():
        (outdir / name).write_text(content)
    return EXIT_OK


def _write_failure(outdir, stem, kind, exc):
    report = Report(kind)
    report.add("error", kind)
    report.add("message", str(exc))
    witness = getattr(exc, "witness", None)
    if witness is not None:
        report.add("witness", witness)
    attained = getattr(exc, "attained", None)
    if attained is not None:
        report.add("attained", attained)
    report.write(Path(outdir) / f"{stem}.report.txt")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="covercraft",
        description="covering-space and lattice-certificate workbench")
    parser.add_argument("task", choices=list(TASKS) + ["run"],
                        help="task to run; `run` takes the task from the scenario")
    parser.add_argument("--scenario", action="append", required=True,
                        help="scenario file (repeatable)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--budget", type=int, default=None, metavar="NODES")
    args = parser.parse_args(argv)

    codes = []
    paths = args.scenario
    if args.jobs > 1 and len(paths) > 1:
        import multiprocessing as mp
        with mp.Pool(args.jobs) as pool:
            codes = pool.starmap(
                _run_one, [(p, args.out, args.task, args.seed, args.budget)
                           for p in paths])
    else:
        for p in paths:
            codes.append(_run_one(p, args.out, args.task, args.seed, args.budget))
    return max(codes) if codes else EXIT_OK


def _run_one(path, out, cli_task, seed, budget):
    try:
        sc = parse_scenario(path)
    except ScenarioParseError as e:
        _write_failure(Path(out) if Path(out).exists() else _ensure(out),
                       Path(path).stem, "parse_error", e)
        return EXIT_PARSE
    if cli_task != "run" and sc.task != cli_task:
        _write_failure(_ensure(out), Path(path).stem, "parse_error",
                       ScenarioParseError(
                           f"scenario task {sc.task!r} does not match CLI task {cli_task!r}"))
        return EXIT_PARSE
    if seed is not None:
        sc.seed = seed
    return run_scenario_file(path, out, budget=budget)


def _ensure(out):
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


if __name__ == "__main__":
    sys.exit(main())
