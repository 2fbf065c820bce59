"""Command-line front end.

Every command prints one JSON document (``"schema": "infodist/1"``) or writes
it atomically to ``--out``. Exit codes: 0 ok, 1 a checked property failed,
2 bad input or usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import generators as gen
from . import io
from .distance import (
    approx_knowledge_bound,
    check_complements,
    check_substitutes,
    compare,
    diameter_bounds,
    distance,
    distance_d1,
    joint_info_bound,
)
from .games import value
from .hierarchy import fixed_point_partition, hierarchy_joint_distribution, hierarchy_partition
from .lp import LPError
from .mertens import (
    SWEEP_COLUMNS,
    MertensSpec,
    check_event_E,
    check_UI,
    paired_spec,
    sample_S,
    sweep,
    truthful_gap_experiment,
)
from .structures import FactoredStructure, InfoStructure, garble_left, garble_right
from .verify import GameSampler, grid_game_gap_search, random_game_gap_search

OK, FAILED, INPUT_ERROR, NUMERICAL_ERROR = 0, 1, 2, 3


class CommandResult:
    def __init__(self, payload: dict, status: int = OK, csv_path: str | None = None):
        self.payload = payload
        self.status = status
        self.csv_path = csv_path
        self.out: str | None = None


def _number(text: str):
    try:
        return Fraction(text) if "/" in text else float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc


def _numbers(text: str) -> list:
    return [_number(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text}") from exc


# ---------------------------------------------------------------------------
# Helpers


def _load(args, path) -> InfoStructure | FactoredStructure:
    return io.load_structure(path, renormalize=args.renormalize, exact=True if args.exact else None)


def _flat(u) -> InfoStructure:
    return u.structure if isinstance(u, FactoredStructure) else u


def _factored(u) -> FactoredStructure:
    if not isinstance(u, FactoredStructure):
        raise io.InputError("this bound needs a structure with c_factors and d_factors")
    return u


def _spec(args) -> MertensSpec:
    if getattr(args, "spec", None):
        try:
            return MertensSpec.from_dict(io.read_json(args.spec))
        except (KeyError, TypeError, ValueError) as exc:
            raise io.InputError(f"bad spec file: {exc}") from exc
    if getattr(args, "paired", False):
        return paired_spec(args.n)
    return sample_S(args.n, args.seed)


# ---------------------------------------------------------------------------
# Commands


def cmd_value(args) -> CommandResult:
    u = _flat(_load(args, args.structure))
    g = io.load_game(args.game, exact=True if args.exact else None)
    cert = value(u, g, exact=args.exact)
    return CommandResult(
        {
            "value": cert.value,
            "sigma1": cert.sigma1,
            "sigma2": cert.sigma2,
            "guarantee1": cert.guarantee1,
            "guarantee2": cert.guarantee2,
            "duality_gap": cert.duality_gap,
        }
    )


def cmd_distance(args) -> CommandResult:
    u, v = _flat(_load(args, args.first)), _flat(_load(args, args.second))
    res = distance(u, v, exact=args.exact)
    out = {
        "d": res.d,
        "forward": {**res.forward.as_dict(), "gap": res.forward.gap},
        "backward": {**res.backward.as_dict(), "gap": res.backward.gap},
    }
    return CommandResult(out)


def cmd_d1(args) -> CommandResult:
    u, v = _flat(_load(args, args.first)), _flat(_load(args, args.second))
    return CommandResult({"d1": distance_d1(u, v, exact=args.exact)})


def cmd_compare(args) -> CommandResult:
    u, v = _flat(_load(args, args.first)), _flat(_load(args, args.second))
    return CommandResult({"relation": compare(u, v, tol=args.tol or 1e-7)})


def cmd_garble(args) -> CommandResult:
    u = _flat(_load(args, args.structure))
    q = io.parse_garbling(io.read_json(args.garbling), exact=True if args.exact else None)
    try:
        out = garble_left(q, u) if args.side == "left" else garble_right(u, q)
    except ValueError as exc:
        raise io.InputError(str(exc)) from exc
    return CommandResult(io.dump_structure(out))


def cmd_gen(args) -> CommandResult:
    name = args.name
    prior = args.prior or [Fraction(1, 2), Fraction(1, 2)]
    single = {
        "no-info": lambda: gen.gen_no_info(prior),
        "full-info-p1": lambda: gen.gen_full_info_p1(prior),
        "full-info-p2": lambda: gen.gen_full_info_p2(prior),
        "common-knowledge": lambda: gen.gen_common_knowledge(prior),
        "example6": lambda: gen.gen_example6(args.n),
        "rubinstein": lambda: gen.gen_rubinstein(args.p, args.alpha, args.T),
        "random": lambda: gen.gen_random(args.seed, args.dims, exact=args.exact, sparsity=args.sparsity),
        "xor-substitutes": gen.gen_xor_substitutes,
        "complements": gen.gen_complements_example,
    }
    pairs = {
        "extreme-pair": lambda: gen.gen_extreme_pair(prior, args.prior2 or prior),
        "example2": gen.gen_example2,
    }
    if name in single:
        out = single[name]()
    else:
        first, second = pairs[name]()
        out = {"first": first, "second": second}[args.part] if args.part else None
        if out is None:
            return CommandResult({"first": io.dump_structure(first), "second": io.dump_structure(second)})
    if args.exact and isinstance(out, InfoStructure):
        out = out.as_exact()
    payload = io.dump_structure(out)
    if name == "random":
        payload["seed"] = args.seed
    return CommandResult(payload)


def cmd_hierarchy(args) -> CommandResult:
    u = _flat(_load(args, args.structure))
    part = hierarchy_partition(u, args.level) if args.level else fixed_point_partition(u)
    joint = hierarchy_joint_distribution(u, part.level)
    table = [
        {"state": k, "class_p1": a, "class_p2": b, "prob": p} for (k, a, b), p in sorted(joint.table.items())
    ]
    return CommandResult(
        {
            "level": part.level,
            "classes_p1": part.classes_p1,
            "classes_p2": part.classes_p2,
            "digests_p1": part.digests_p1,
            "digests_p2": part.digests_p2,
            "joint": table,
        }
    )


def cmd_bounds(args) -> CommandResult:
    kind = args.kind
    if kind == "diameter":
        if not args.p or not args.q:
            raise io.InputError("diameter needs --p and --q")
        b = diameter_bounds([float(x) for x in args.p], [float(x) for x in args.q])
        return CommandResult({"min_d": b.min_d, "max_d": b.max_d, "p_opt": b.p_opt, "q_opt": b.q_opt,
                              "closed_form": None if b.closed_form is None else float(b.closed_form)})
    if args.structure is None:
        raise io.InputError(f"{kind} needs a structure file")
    u = _load(args, args.structure)
    if kind == "joint-info":
        rep = joint_info_bound(_factored(u))
    elif kind == "approx-knowledge":
        rep = approx_knowledge_bound(_flat(u), args.kappa_c, args.kappa_d)
    elif kind == "substitutes":
        rep = check_substitutes(_factored(u))
    else:
        rep = check_complements(_factored(u))
    holds = getattr(rep, "holds", None)
    if kind in ("substitutes", "complements"):
        holds = rep.inequality_holds if rep.asserted else True
    return CommandResult(io.to_jsonable(rep), OK if holds is not False else FAILED)


def cmd_mertens(args) -> CommandResult:
    action = args.action
    if action == "sweep":
        rows = sweep(args.ns, range(args.seed, args.seed + args.seeds), values_max_N=args.values_max_n,
                     ui_level=args.level, workers=args.workers)
        payload = {"columns": list(SWEEP_COLUMNS), "rows": rows}
        if args.csv:
            io.write_atomic(args.csv, io.csv_text(rows, SWEEP_COLUMNS))
        return CommandResult(payload, csv_path=args.csv)
    spec = _spec(args)
    if action == "sample":
        return CommandResult({"spec": spec.to_dict()})
    if action == "check-ui":
        rep = check_UI(spec, args.level)
        fams = [io.to_jsonable(f) for f in rep.families]
        return CommandResult({"N": spec.N, "seed": spec.seed, "level": rep.level, "alpha": rep.alpha,
                              "max_deviation": rep.max_deviation, "passes": rep.passes,
                              "truthful_all_one": rep.truthful_all_one, "families": fams})
    if action == "check-e":
        holds, dev = check_event_E(spec, args.two_alpha)
        return CommandResult({"N": spec.N, "seed": spec.seed, "holds": holds, "max_deviation": dev})
    exp = truthful_gap_experiment(spec, args.level, args.m)
    ok = (exp.signs_ok or not exp.ui_passes) and exp.sound
    return CommandResult({"seed": spec.seed, **exp.as_dict(), "asserted": exp.ui_passes}, OK if ok else FAILED)


def cmd_oracle(args) -> CommandResult:
    u, v = _flat(_load(args, args.first)), _flat(_load(args, args.second))
    L = args.actions or max(u.c_count, u.d_count, v.c_count, v.d_count)
    if args.grid_step:
        res = grid_game_gap_search(u.as_float(), v.as_float(), L, args.grid_step, workers=args.workers)
    else:
        sampler = GameSampler(args.seed, L, L, trials=args.trials)
        res = random_game_gap_search(u.as_float(), v.as_float(), sampler, workers=args.workers)
    return CommandResult(res.as_dict(), OK if res.sound else FAILED)


# ---------------------------------------------------------------------------
# Parser


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(None), help="seed for every random choice")
    parser.add_argument("--tol", type=float, default=d(None), help="tolerance for comparisons")
    parser.add_argument("--exact", action="store_true", default=d(False), help="rational arithmetic")
    parser.add_argument("--renormalize", action="store_true", default=d(False), help="rescale input mass to 1")
    parser.add_argument("--out", default=d(None), help="write the JSON result here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infodist", description="Value-based distances between information structures.")
    _common(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("value", cmd_value, "value of a game on a structure")
    p.add_argument("structure")
    p.add_argument("game")
    for name, func, text in (
        ("distance", cmd_distance, "distance with certificates"),
        ("d1", cmd_d1, "single-agent distance"),
        ("compare", cmd_compare, "garbling order between two structures"),
    ):
        p = add(name, func, text)
        p.add_argument("first")
        p.add_argument("second")
    p = add("garble", cmd_garble, "apply a garbling to one player's signal")
    p.add_argument("structure")
    p.add_argument("garbling")
    p.add_argument("--side", choices=["left", "right"], default="left", help="left: player 1, right: player 2")
    p = add("gen", cmd_gen, "generate a named structure")
    p.add_argument("name", choices=["no-info", "full-info-p1", "full-info-p2", "common-knowledge", "extreme-pair",
                                    "example6", "example2", "rubinstein", "random", "xor-substitutes", "complements"])
    p.add_argument("--prior", type=_numbers)
    p.add_argument("--prior2", type=_numbers)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=_number, default=Fraction(1, 2))
    p.add_argument("--alpha", type=_number, default=Fraction(1, 4))
    p.add_argument("--T", type=int, default=12)
    p.add_argument("--dims", type=_ints, default=[2, 2, 2])
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--part", choices=["first", "second"])
    p = add("hierarchy", cmd_hierarchy, "belief-hierarchy partition and joint law")
    p.add_argument("structure")
    p.add_argument("--level", type=int, help="default: the fixed point")
    p = add("bounds", cmd_bounds, "distance bounds")
    p.add_argument("kind", choices=["diameter", "joint-info", "approx-knowledge", "substitutes", "complements"])
    p.add_argument("structure", nargs="?")
    p.add_argument("--p", type=_numbers)
    p.add_argument("--q", type=_numbers)
    p.add_argument("--kappa-c", type=_ints)
    p.add_argument("--kappa-d", type=_ints)
    p = add("mertens", cmd_mertens, "random-subset construction experiments")
    p.add_argument("action", choices=["sample", "check-ui", "check-e", "values", "sweep"])
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--ns", type=_ints, default=[8, 16, 32, 64])
    p.add_argument("--seeds", type=int, default=100, help="sweep: number of consecutive seeds")
    p.add_argument("--spec", help="spec JSON from `mertens sample`")
    p.add_argument("--paired", action="store_true", help="use the hand-built N = 8 spec")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--m", type=int)
    p.add_argument("--two-alpha", type=float)
    p.add_argument("--values-max-n", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.add_argument("--csv")
    p = add("oracle", cmd_oracle, "sampled-game lower bound against the LP distance")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--actions", type=int)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--workers", type=int)
    return parser


def dispatch(argv: list[str] | None = None) -> CommandResult:
    parser = build_parser()
    args = parser.parse_args(argv)
    seeded = args.seed is not None
    if not seeded:
        args.seed = int(np.random.SeedSequence().entropy % (2**63))
    try:
        result = args.func(args)
    except io.InputError as exc:
        print(f"infodist: {exc}", file=sys.stderr)
        return CommandResult({"schema": io.SCHEMA, "error": str(exc)}, INPUT_ERROR)
    except LPError as exc:
        print(f"infodist: numerical failure: {exc}", file=sys.stderr)
        return CommandResult({"schema": io.SCHEMA, "error": str(exc)}, NUMERICAL_ERROR)
    except (ValueError, TypeError) as exc:
        print(f"infodist: {exc}", file=sys.stderr)
        return CommandResult({"schema": io.SCHEMA, "error": str(exc)}, INPUT_ERROR)
    payload = {"schema": io.SCHEMA, "command": args.command, **result.payload}
    if not seeded and args.command in ("gen", "mertens", "oracle"):
        payload["entropy_seed"] = args.seed
    result.payload = payload
    result.out = args.out
    return result


def main(argv: list[str] | None = None) -> int:
    result = dispatch(argv)
    text = io.dumps(result.payload)
    if result.out and result.status in (OK, FAILED):
        io.write_atomic(result.out, text)
    else:
        sys.stdout.write(text)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
