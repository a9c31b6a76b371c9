"""Command line entry point: ``encbel validate|query|oracle-check|example3``.

Exit codes: 0 ok, 1 validation failure, 2 numeric mismatch, 3 resource cap.
The product-space cap can be raised or lowered with ENCBEL_MAX_CONFIGS.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

import numpy as np

from .errors import (
    EncError,
    MustMergeError,
    NetworkValidationError,
    PreconditionError,
    ResourceCapError,
)
from .generate import random_loop_network, random_polytree
from .io import load_network
from .massfn import normalize, render_table
from .network import merge_loops, partition_optimize, propagate_merged, propagate_polytree, validate
from .oracle import oracle_marginals

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH, EXIT_CAP = 0, 1, 2, 3
MATCH_TOL = 1e-9
METHODS = ("auto", "polytree", "merged", "partition", "oracle")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def fixture_paths() -> tuple[str, str]:
    root = resources.files("encbel") / "data"
    return str(root / "example3.json"), str(root / "example3_evidence.json")


def _load_checked(path, evidence=None):
    net = load_network(path, evidence)
    rep = validate(net)
    if not rep.ok:
        raise NetworkValidationError(rep.errors)
    return net, rep


# -- validate --------------------------------------------------------------------

def cmd_validate(args) -> int:
    net = load_network(args.path, args.evidence)
    rep = validate(net)
    for e in rep.errors:
        print(f"error: {e}")
    if not rep.ok:
        return EXIT_INVALID
    print(f"OK: {len(net.variables)} variables, {len(net.families)} edges, "
          f"{'polytree' if rep.polytree else 'has undirected loops (merging needed)'}")
    for (p, c), info in rep.relevance.items():
        irr = ",".join(str(x) for x in info.labels()[1])
        print(f"{p}->{c}: irrelevant Φ_{c}={{{irr}}}")
    for n in rep.notes:
        print(f"note: {n}")
    return EXIT_OK


# -- query -----------------------------------------------------------------------

def _general(net):
    if net.is_polytree():
        return propagate_polytree(net), "polytree"
    return propagate_merged(merge_loops(net)), "merged"


def run_method(net, target: str, method: str):
    """Marginal of ``target``; returns (belief, method actually used, extra lines)."""
    extra: list[str] = []
    if method == "oracle":
        return oracle_marginals(net).marginals[target], "oracle", extra
    if method == "merged":
        return propagate_merged(merge_loops(net))[target], "merged", extra
    if method == "polytree":
        try:
            return propagate_polytree(net, [target])[target], "polytree", extra
        except MustMergeError as e:
            _err(f"polytree method not applicable ({e}); falling back to merged")
            return propagate_merged(merge_loops(net))[target], "merged", extra
    if method == "partition":
        try:
            m, plan = partition_optimize(net, target)
        except (PreconditionError, MustMergeError) as e:
            out, used = _general(net)
            _err(f"partition method not applicable ({e}); falling back to {used}")
            return out[target], used, extra
        for g in plan.groups:
            extra.append(f"group {list(g.members)} on {g.partition.coarse.name} = "
                         f"{{{','.join(g.partition.coarse.frame)}}}")
            extra.append(render_table(g.belief))
        return m, "partition", extra
    out, used = _general(net)
    return out[target], used, extra


def cmd_query(args) -> int:
    net, _ = _load_checked(args.path, args.evidence)
    if args.target not in net.variables:
        _err(f"unknown target variable {args.target!r}")
        return EXIT_INVALID
    m, used, extra = run_method(net, args.target, args.method)
    for line in extra:
        print(line)
    if args.normalize:
        m = normalize(m)
    print(f"BEL_{args.target} (method {used}{', normalized' if args.normalize else ''})")
    print(render_table(m), end="")
    return EXIT_OK


# -- oracle-check ----------------------------------------------------------------

def check_network(net) -> tuple[dict[str, dict[str, float]], int]:
    """Deviation from the oracle per method and variable."""
    ref = oracle_marginals(net).marginals
    results: dict[str, dict[str, float]] = {}
    out, used = _general(net)
    results[used] = {v: out[v].max_abs_diff(ref[v]) for v in net.variables}
    if used == "polytree":
        for v in net.variables:
            if len(net.children(v)) >= 2:
                m, _ = partition_optimize(net, v)
                results.setdefault("partition", {})[v] = m.max_abs_diff(ref[v])
    worst = max((d for r in results.values() for d in r.values()), default=0.0)
    return results, EXIT_MISMATCH if worst > MATCH_TOL else EXIT_OK


def _report(results, indent=""):
    for method, devs in results.items():
        for v, d in devs.items():
            flag = "FAIL" if d > MATCH_TOL else "ok"
            print(f"{indent}{method:<9} {v:<8} max deviation {d:.3e}  {flag}")


def _trial_network(rng, k):
    kind = k % 4
    if kind == 2:
        return random_loop_network(rng, "2a"), "loop 2a"
    if kind == 3:
        return random_loop_network(rng, "2c"), "loop 2c"
    return random_polytree(rng), "polytree"


def cmd_oracle_check(args) -> int:
    if args.trials is None:
        if args.path is None:
            _err("oracle-check needs a network file or --trials")
            return EXIT_INVALID
        net, _ = _load_checked(args.path, args.evidence)
        results, status = check_network(net)
        _report(results)
        print("PASS" if status == EXIT_OK else "FAIL")
        return status
    rng = np.random.default_rng(args.seed)
    status, passed, failed, capped = EXIT_OK, 0, 0, 0
    for k in range(args.trials):
        net, kind = _trial_network(rng, k)
        try:
            results, st = check_network(net)
        except ResourceCapError as e:
            capped += 1
            print(f"trial {k:4d} {kind:<8} SKIP resource cap: {e}")
            continue
        worst = max(d for r in results.values() for d in r.values())
        if st == EXIT_OK:
            passed += 1
            print(f"trial {k:4d} {kind:<8} PASS max deviation {worst:.3e}")
        else:
            failed += 1
            status = st
            print(f"trial {k:4d} {kind:<8} FAIL max deviation {worst:.3e}")
            _report(results, indent="    ")
    print(f"{passed} passed, {failed} failed, {capped} skipped (seed {args.seed})")
    return status


def cmd_example3(args) -> int:
    net_path, ev_path = fixture_paths()
    print(f"network  {net_path}")
    print(f"evidence {ev_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="encbel", description="Belief propagation in evidential networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file and print relevance sets")
    p.add_argument("path")
    p.add_argument("--evidence")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", help="print the marginal of one variable")
    p.add_argument("path")
    p.add_argument("--target", required=True)
    p.add_argument("--evidence")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--normalize", action="store_true", help="apply Dempster normalization to the output")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("oracle-check", help="compare propagation against the brute-force joint")
    p.add_argument("path", nargs="?")
    p.add_argument("--evidence")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("example3", help="print the paths of the bundled example network")
    p.set_defaults(func=cmd_example3)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceCapError as e:
        _err(f"resource cap: {e}")
        return EXIT_CAP
    except NetworkValidationError as e:
        for prob in e.problems:
            _err(f"error: {prob}")
        return EXIT_INVALID
    except (EncError, OSError) as e:
        _err(f"error: {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
