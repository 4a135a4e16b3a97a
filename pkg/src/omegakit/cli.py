"""Batch command-line harness.

Every command takes a flat JSON config (``--config``), merges it over built-in
defaults, and writes JSON or CSV to ``--out`` (stdout by default). Output is
a pure function of the resolved config and seed.

Exit codes: 0 ok, 2 schema violation, 3 numerical failure, 4 invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Callable

import numpy as np

from . import cones, lattice, polytopes, shear, sp_counting, weights
from .exact import format_fraction, to_fraction

SCHEMA_VERSION = 1

EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4


class SchemaError(ValueError):
    pass


def _real(x: float) -> str:
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    return obj


class Result:
    def __init__(self, record: dict, table: tuple[list[str], list[list]] | None = None,
                 violations: list[str] | None = None):
        self.record = record
        self.table = table
        self.violations = violations or []


# -- command implementations ----------------------------------------------------------

def _cylinder_functionals():
    return [[0, 0, 1], [0, 0, -1], [-1, -1, 0], [1, -1, 0], [0, 1, 0]]


def _sl2_standard():
    return {"rank": 1, "weights": [[[1], 1], [[-1], 1]]}


def _ws(rec) -> weights.WeightSystem:
    try:
        return weights.WeightSystem.from_record(rec)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad weight system: {e}") from e


def cmd_weights_wedge(cfg, seed, threads) -> Result:
    a = _ws(cfg["weights"])
    out = weights.wedge_closure(a)
    bad = [] if out.dim == 2 ** a.dim else ["dimension of wedge closure is not 2^dim"]
    return Result({"system": out.to_record(), "dim": out.dim}, violations=bad)


def cmd_weights_tensor(cfg, seed, threads) -> Result:
    a, b = _ws(cfg["a"]), _ws(cfg["b"])
    out = weights.tensor(a, b)
    bad = [] if out.dim == a.dim * b.dim else ["tensor dimension mismatch"]
    return Result({"system": out.to_record(), "dim": out.dim}, violations=bad)


def cmd_weights_ext(cfg, seed, threads) -> Result:
    a = _ws(cfg["weights"])
    k = int(cfg["k"])
    if not 0 <= k <= a.dim:
        raise SchemaError(f"k = {k} out of range 0..{a.dim}")
    out = weights.exterior_power(a, k)
    bad = [] if out.dim == math.comb(a.dim, k) else ["dimension is not binomial(dim, k)"]
    return Result({"system": out.to_record(), "dim": out.dim}, violations=bad)


def _functional_set(cfg) -> cones.FunctionalSet:
    try:
        fs = [tuple(f) for f in cfg["functionals"]]
        return cones.FunctionalSet(int(cfg.get("dim") or len(fs[0])), tuple(fs))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise SchemaError(f"bad functional set: {e}") from e


def cmd_cones_decompose(cfg, seed, threads) -> Result:
    phi = _functional_set(cfg)
    schedule = cfg["schedule"]
    if len(schedule) != len(phi):
        raise SchemaError("schedule must tag every functional")
    dec = cones.classify_sequence(phi, schedule, cfg.get("metric"))
    bad = []
    try:
        cones.check_decomposition(phi, dec)
    except AssertionError as e:
        bad.append(str(e))
    rec = dec.to_record()
    try:
        rec["interior_vector"] = [format_fraction(x) for x in cones.interior_vector(phi, dec.phi0)]
    except cones.InfeasibleError:
        rec["interior_vector"] = None
    return Result(rec, violations=bad)


def _polytope(cfg) -> polytopes.HPolytope:
    try:
        return polytopes.HPolytope.from_record(cfg["polytope"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise SchemaError(f"bad polytope: {e}") from e


def cmd_poly_volume(cfg, seed, threads) -> Result:
    p = _polytope(cfg)
    vol = polytopes.volume(p)
    return Result({"volume": vol, "volume_float": float(vol)})


def cmd_poly_vertices(cfg, seed, threads) -> Result:
    p = _polytope(cfg)
    vs = polytopes.vertices(p)
    bad = [f"vertex {v} violates a constraint" for v in vs if not p.contains(v)]
    return Result({"vertices": [[format_fraction(x) for x in v] for v in vs]},
                  table=([f"x{i + 1}" for i in range(p.dim)],
                         [[format_fraction(x) for x in v] for v in vs]),
                  violations=bad)


def _offset_schedule(cfg):
    entries = cfg["offsets"]
    consts, slopes = [], []
    for e in entries:
        if "const" in e:
            consts.append(to_fraction(e["const"]))
            slopes.append(Fraction(0))
        elif "linear" in e:
            c0, c1 = (to_fraction(x) for x in e["linear"])
            if c1 > 0:
                raise SchemaError("offsets may only decrease to -infinity")
            consts.append(c0)
            slopes.append(c1)
        else:
            raise SchemaError(f"offset entry {e} needs 'const' or 'linear'")
    return consts, slopes


def _omega_rule(spec) -> Callable[[int], Fraction]:
    rule = spec.get("rule", "sqrt")
    if rule == "sqrt":
        return polytopes.rational_sqrt
    if rule == "linear":
        c = to_fraction(spec["coefficient"])
        return lambda n: c * n
    if rule == "const":
        c = to_fraction(spec["value"])
        return lambda n: c
    raise SchemaError(f"unknown omega rule {rule!r}")


def cmd_poly_ratio(cfg, seed, threads) -> Result:
    phi = _functional_set(cfg)
    consts, slopes = _offset_schedule(cfg)
    if len(consts) != len(phi):
        raise SchemaError("one offset entry per functional")
    schedule = [cones.DIVERGES if s else c for c, s in zip(consts, slopes)]
    dec = cones.classify_sequence(phi, schedule, cfg.get("metric"))
    rep = polytopes.ratio_experiment(
        phi, dec, lambda n: [c + s * n for c, s in zip(consts, slopes)],
        _omega_rule(cfg.get("omega", {})), [int(n) for n in cfg["n_list"]])
    bad = [f"n = {n}: split polytope not contained in Omega"
           for n, ok in zip(rep.n_values, rep.contained) if not ok]
    rows = [[n, format_fraction(om), format_fraction(vs), format_fraction(vf), _real(r)]
            for n, om, vs, vf, r in rep.rows()]
    rec = {"decomposition": dec.to_record(), "rows": rows,
           "limit_estimate": rep.limit_estimate, "converging": rep.converging}
    return Result(rec, table=(["n", "omega", "vol_split", "vol_full", "ratio"], rows),
                  violations=bad)


def _matrix(cfg, key="matrix"):
    try:
        return [[to_fraction(x) for x in row] for row in cfg[key]]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise SchemaError(f"bad matrix: {e}") from e


def cmd_lattice_svp(cfg, seed, threads) -> Result:
    sv = lattice.shortest_vector(_matrix(cfg), cfg.get("norm", lattice.EUCLIDEAN))
    return Result({"vector": list(sv.vector), "norm": sv.norm,
                   ("norm_squared" if sv.kind == lattice.EUCLIDEAN else "norm_exact"): sv.norm_exact})


def cmd_lattice_omega(cfg, seed, threads) -> Result:
    try:
        act = lattice.WeightLatticeAction.from_record(cfg)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad action: {e}") from e
    p = lattice.omega_polytope(act, float(cfg["epsilon"]), cfg.get("phi_subset"),
                               cfg.get("norm", lattice.EUCLIDEAN))
    rec = {"polytope": p.to_record(), "empty": polytopes.is_empty(p)}
    if polytopes.is_bounded(p):
        rec["volume"] = float(polytopes.volume(p))
    return Result(rec)


def cmd_lattice_mahler(cfg, seed, threads) -> Result:
    B = _matrix(cfg)
    sv = lattice.shortest_vector(B, cfg.get("norm", lattice.EUCLIDEAN))
    member = lattice.mahler_membership(B, to_fraction(cfg["eta"]), cfg.get("norm", lattice.EUCLIDEAN))
    return Result({"member": member, "shortest_norm": sv.norm, "vector": list(sv.vector)})


def _spec(cfg) -> sp_counting.SymplecticSpec:
    try:
        return sp_counting.SymplecticSpec(int(cfg["N"]), tuple(cfg["d"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad symplectic spec: {e}") from e


def _list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def cmd_count_sp(cfg, seed, threads) -> Result:
    spec = _spec(cfg)
    if spec.N != 1:
        raise SchemaError("exact counting is only available for N = 1")
    rs = _list(cfg["R"])
    series = sp_counting.count_series(spec, rs)
    bad = ["count decreased as R grew"
           for (r1, c1), (r2, c2) in zip(zip(rs, series.count), zip(rs[1:], series.count[1:]))
           if r2 >= r1 and c2 < c1]
    rows = [[_real(r), c, _real(nr), _real(q)] for r, c, nr, q in series.rows()]
    return Result({"rows": rows, "fitted_constant": series.fitted_constant},
                  table=(["R", "count", "N_R", "count_over_N_R"], rows), violations=bad)


def cmd_count_constants(cfg, seed, threads) -> Result:
    spec = _spec(cfg)
    rec = {"C2": sp_counting.constant_C2(spec),
           "jacobian": sp_counting.jacobian_divisor(spec),
           "xi_values": {str(2 * k): float(sp_counting.xi(2 * k)) for k in range(1, spec.N + 1)}}
    if spec.N <= 3:
        rec["C1"] = sp_counting.constant_C1(spec)
        rec["C1_polytope_volume"] = sp_counting.c1_polytope_volume(spec.N)
    return Result(rec)


def cmd_count_ballratio(cfg, seed, threads) -> Result:
    spec = _spec(cfg)
    samples = int(cfg["samples"])
    br = sp_counting.ball_ratio_mc(spec, float(cfg["R"]), float(cfg["epsilon"]), samples, seed, threads)
    rec = {"ratio_BRe_BR": br.ratio_BRe_BR, "ratio_BR_C2RN2": br.ratio_BR_C2RN2,
           "mu_BR": br.mu_BR, "se_mu_BR": br.se_mu_BR}
    return Result(rec, table=(["ratio_BRe_BR", "ratio_BR_C2RN2", "mu_BR", "se_mu_BR"],
                              [[_real(br.ratio_BRe_BR), _real(br.ratio_BR_C2RN2),
                                _real(br.mu_BR), _real(br.se_mu_BR)]]))


def cmd_count_growth(cfg, seed, threads) -> Result:
    spec = _spec(cfg)
    rep = sp_counting.growth_estimate_check(spec.N, int(cfg["samples"]),
                                            [float(r) for r in cfg["R_list"]],
                                            float(cfg["epsilon_prime"]), seed, spec, threads)
    rows = [[_real(r), _real(a), _real(b), _real(c)] for r, a, b, c in
            zip(rep.R, rep.max_normalized_deviation, rep.max_absolute_deviation, rep.max_log_ratio)]
    return Result({"rows": rows, "bounded": rep.bounded},
                  table=(["R", "max_normalized_deviation", "max_absolute_deviation",
                          "max_log_ratio"], rows))


def cmd_dyn_osc(cfg, seed, threads) -> Result:
    lo, hi = (float(x) for x in cfg["support"])
    f = shear.BumpFunction(lo, hi, int(cfg["order"]))
    m = int(cfg["m"])
    if m == 0:
        raise SchemaError("m must be nonzero")
    rows = []
    for n in cfg["n_list"]:
        v = shear.oscillatory_integral(f, m, float(n))
        rows.append([_real(n), _real(v.real), _real(v.imag), _real(abs(v))])
    bound = float(f.integral())
    bad = [f"|I({r[0]})| exceeds int f" for r in rows if float(r[3]) > bound + 1e-8]
    return Result({"rows": rows, "integral_of_f": bound},
                  table=(["n", "re", "im", "abs"], rows), violations=bad)


def cmd_dyn_wrap(cfg, seed, threads) -> Result:
    window = tuple(float(x) for x in cfg["window"])
    g = shear.BumpFunction(window[0], window[1], 3)
    modes = [shear.Mode(int(m), g) for m in cfg["modes"]]
    rows = [[_real(n), _real(shear.wrap_curve_discrepancy(float(n), window, int(cfg["num_points"]),
                                                          modes))]
            for n in cfg["n_list"]]
    return Result({"rows": rows}, table=(["n", "discrepancy"], rows))


def cmd_dyn_shear(cfg, seed, threads) -> Result:
    sc = shear.ShearConfig(int(cfg["n"]), tuple(float(x) for x in cfg["v"]), float(cfg["lambda"]),
                           tuple(float(k) for k in cfg["k_list"]))
    rep = shear.conjugation_limit_check(sc)
    grid_err = 0.0
    for t in np.linspace(-3, 3, 20):
        for s in np.linspace(-2, 2, 20):
            v = s * np.array(sc.v) / math.hypot(*sc.v)
            grid_err = max(grid_err, float(np.max(np.abs(
                shear.sheared_orbit_point(t, v) - shear.orbit_point_by_action(t, v)))))
    bad = [] if grid_err <= 1e-9 else [f"closed form deviates from matrix action by {grid_err}"]
    rows = [[_real(k), _real(t), _real(d)] for k, t, d in zip(rep.k, rep.t, rep.deviation)]
    return Result({"rows": rows, "grid_max_error": grid_err, "decreasing": rep.decreasing},
                  table=(["k", "t_k", "deviation"], rows), violations=bad)


COMMANDS: dict[tuple[str, str], tuple[Callable, dict, str]] = {
    ("weights", "wedge"): (cmd_weights_wedge, {"weights": _sl2_standard()}, "json"),
    ("weights", "tensor"): (cmd_weights_tensor, {"a": _sl2_standard(), "b": _sl2_standard()}, "json"),
    ("weights", "ext"): (cmd_weights_ext, {"weights": weights.standard_sp(2).to_record(), "k": 2},
                         "json"),
    ("cones", "decompose"): (cmd_cones_decompose, {
        "dim": 3, "functionals": _cylinder_functionals(),
        "schedule": [0, cones.DIVERGES, -1, -1, -1], "metric": None}, "json"),
    ("poly", "volume"): (cmd_poly_volume, {"polytope": {
        "dim": 2, "constraints": [[[0, 1], -1], [[1, -1], -1], [[-1, -1], -1]]}}, "json"),
    ("poly", "vertices"): (cmd_poly_vertices, {"polytope": {
        "dim": 2, "constraints": [[[0, 1], -1], [[1, -1], -1], [[-1, -1], -1]]}}, "json"),
    ("poly", "ratio"): (cmd_poly_ratio, {
        "dim": 3, "functionals": _cylinder_functionals(),
        "offsets": [{"const": 0}, {"linear": [0, -1]}, {"const": -1}, {"const": -1}, {"const": -1}],
        "omega": {"rule": "sqrt"}, "n_list": [100, 1000, 10000], "metric": None}, "csv"),
    ("lattice", "svp"): (cmd_lattice_svp, {"matrix": [[2, 0], [0, "1/2"]], "norm": "euclidean"},
                         "json"),
    ("lattice", "omega"): (cmd_lattice_omega, {
        "blocks": [{"character": [1], "matrix": [[1], [0]]},
                   {"character": [-1], "matrix": [[1], [1]]}],
        "epsilon": 1, "phi_subset": None, "norm": "euclidean"}, "json"),
    ("lattice", "mahler"): (cmd_lattice_mahler, {"matrix": [[1, 0], [0, 1]], "eta": 1,
                                                 "norm": "euclidean"}, "json"),
    ("count", "sp"): (cmd_count_sp, {"N": 1, "d": [1], "R": [128]}, "csv"),
    ("count", "constants"): (cmd_count_constants, {"N": 1, "d": [1]}, "json"),
    ("count", "ballratio"): (cmd_count_ballratio, {"N": 2, "d": [1, 2], "R": 1000, "epsilon": 0.1,
                                                   "samples": 1_000_000}, "json"),
    ("count", "growth"): (cmd_count_growth, {"N": 2, "d": [1, 2], "samples": 1000,
                                             "R_list": [100, 1000, 10000],
                                             "epsilon_prime": 0.1}, "csv"),
    ("dyn", "osc"): (cmd_dyn_osc, {"m": 1, "n_list": [10, 100, 1000, 10000], "support": [0, 1],
                                   "order": 3}, "csv"),
    ("dyn", "wrap"): (cmd_dyn_wrap, {"n_list": [0, 10, 100, 1000, 10000], "window": [0, 1],
                                     "num_points": 1_000_000, "modes": [1, 2, 3]}, "csv"),
    ("dyn", "shear"): (cmd_dyn_shear, {"n": 2, "v": [1], "lambda": 1,
                                       "k_list": [100, 1000, 10000]}, "csv"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omegakit", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)
    for group in sorted({g for g, _ in COMMANDS}):
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="command", required=True)
        for g, name in COMMANDS:
            if g != group:
                continue
            p = sub.add_parser(name)
            p.add_argument("--config", help="JSON config file merged over the defaults")
            p.add_argument("--seed", type=int, help="64-bit seed for Monte-Carlo commands")
            p.add_argument("--out", help="output path (default: stdout)")
            p.add_argument("--format", choices=("json", "csv"))
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                           help="override one config key")
            if group == "count":
                p.add_argument("--N", type=int)
                p.add_argument("--d", help="comma-separated d values")
                p.add_argument("--R", help="comma-separated radii")
    return parser


def resolve_config(args) -> dict:
    defaults, = [d for (g, c), (_, d, _) in COMMANDS.items() if (g, c) == (args.group, args.command)]
    cfg = json.loads(json.dumps(defaults))
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise SchemaError(f"cannot read config: {e}") from e
        if not isinstance(user, dict):
            raise SchemaError("config must be a JSON object")
        cfg.update(user)
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise SchemaError(f"--set expects KEY=JSON, got {item!r}")
        try:
            cfg[key] = json.loads(value)
        except json.JSONDecodeError:
            cfg[key] = value
    if getattr(args, "N", None) is not None:
        cfg["N"] = args.N
    if getattr(args, "d", None):
        cfg["d"] = [int(x) for x in args.d.split(",")]
    if getattr(args, "R", None):
        rs = [float(x) if "." in x or "e" in x.lower() else int(x) for x in args.R.split(",")]
        cfg["R"] = rs if len(rs) > 1 or args.command == "sp" else rs[0]
    unknown = set(cfg) - set(defaults) - {"seed"}
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def render(result: Result, fmt: str, command: str, cfg: dict, seed: int) -> str:
    if fmt == "csv":
        if result.table is None:
            raise SchemaError(f"{command} has no tabular output; use --format json")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header, rows = result.table
        w.writerow(header)
        for r in rows:
            w.writerow(r)
        return buf.getvalue()
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg, "seed": seed,
           "result": result.record, "violations": result.violations}
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_SCHEMA if e.code else 0
    command = f"{args.group} {args.command}"
    fn, _, default_fmt = COMMANDS[(args.group, args.command)]
    try:
        cfg = resolve_config(args)
        seed = args.seed if args.seed is not None else int(cfg.pop("seed", 0))
        cfg.pop("seed", None)
        if not 0 <= seed < 2 ** 64:
            raise SchemaError("seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise SchemaError("--threads must be positive")
        result = fn(cfg, seed, args.threads)
        text = render(result, args.format or default_fmt, command, cfg, seed)
    except (SchemaError, KeyError) as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ArithmeticError, lattice.SingularMatrixError, polytopes.UnboundedError,
            cones.InfeasibleError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if result.violations:
        for v in result.violations:
            print(f"invariant violation: {v}", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
