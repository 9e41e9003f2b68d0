"""Command-line interface: ``egoclique <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on bad input data.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import _jit
from .chi2 import chi2_detect
from .detect import detect, recover_clique
from .fit import FitError, fit_model
from .harness import DETECTORS, SimConfig, format_tables, paper_suite, simulate
from .io import EdgeListError, read_document, read_edge_list, write_edge_list, write_report
from .models import (
    BERNOULLI, KINDS, CliquePlan, ModelSpec, choose_clique, embed_clique, generate,
    make_simulation_spec,
)

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv(text):
    return [t for t in text.replace(",", " ").split() if t]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="egoclique", description="Egonet-based anomalous clique detection.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True, out_help="output path, '-' for stdout", out_default="-"):
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads/processes")
        sp.add_argument("--out", default=out_default, help=out_help)

    g = sub.add_parser("generate", help="sample a graph from a null model")
    g.add_argument("--model", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, help="edge probability (er only)")
    g.add_argument("--density", type=float, default=0.05,
                   help="expected density for the non-er configurations (default 0.05)")
    common(g)

    e = sub.add_parser("embed-clique", help="plant a clique in an edge list")
    e.add_argument("input", help="edge list path or '-'")
    grp = e.add_mutually_exclusive_group(required=True)
    grp.add_argument("--m", type=int, help="clique size; members drawn at random")
    grp.add_argument("--members", type=_csv, help="explicit member labels, comma separated")
    common(e)

    d = sub.add_parser("detect", help="run the egonet test on an edge list")
    d.add_argument("input", help="edge list path or '-'")
    d.add_argument("--model", choices=KINDS, default="er")
    d.add_argument("--k", type=int, help="number of communities (sbm, dcsbm, pabm)")
    d.add_argument("--alpha", type=float, default=0.01)
    d.add_argument("--chi2", action="store_true", help="also run the chi-square benchmark")
    common(d, out_help="write the JSON report here", out_default=None)

    r = sub.add_parser("recover-clique", help="maximum clique among flagged nodes")
    r.add_argument("input", help="edge list path or '-'")
    grp = r.add_mutually_exclusive_group(required=True)
    grp.add_argument("--flagged", type=_csv, help="flagged labels, comma separated")
    grp.add_argument("--report", help="detection report JSON written by 'detect --out'")
    common(r, seed=False)

    s = sub.add_parser("simulate", help="Monte-Carlo size/power study")
    s.add_argument("--suite", choices=["paper"], help="run the reference simulation factorial")
    s.add_argument("--scale", type=float, default=0.05,
                   help="fraction of the reference replicate counts (suite mode)")
    s.add_argument("--model", choices=KINDS, help="single-cell mode: model")
    s.add_argument("--n", type=int, nargs="+", default=[500])
    s.add_argument("--m", type=int, nargs="+", default=[10], help="clique sizes")
    s.add_argument("--alpha", type=float, nargs="+", default=[0.01])
    s.add_argument("--replicates", type=int, default=100)
    s.add_argument("--detectors", nargs="+", choices=DETECTORS, default=["egonet"])
    s.add_argument("--k", type=int)
    common(s, out_help="write the JSON summary here", out_default=None)
    return p


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_generate(a):
    if a.n < 2:
        raise UsageError("--n must be at least 2")
    if a.model == "er":
        p = a.p if a.p is not None else a.density
        if not 0 <= p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        spec = ModelSpec("er", a.n, {"p": p}, BERNOULLI)
    else:
        if a.p is not None:
            raise UsageError("--p only applies to --model er")
        spec = make_simulation_spec(a.model, a.n, a.seed, a.density)
    g = generate(spec, a.seed)
    header = f"egoclique generate --model {a.model} --n {a.n} --seed {a.seed}"
    write_edge_list(g, a.out, header=header)
    return 0


def cmd_embed(a):
    g, labels = read_edge_list(a.input)
    if a.m is not None:
        if not 2 <= a.m <= g.n:
            raise UsageError(f"--m must lie in [2, {g.n}]")
        plan = choose_clique(g.n, a.m, a.seed)
    else:
        pos = {lab: i for i, lab in enumerate(labels)}
        missing = [x for x in a.members if x not in pos]
        if missing:
            raise EdgeListError(0, f"unknown member labels {missing}")
        plan = CliquePlan(tuple(pos[x] for x in a.members))
    h = embed_clique(g, plan)
    members = " ".join(labels[i] for i in plan.members)
    write_edge_list(h, a.out, labels, header=f"clique: {members}")
    print(f"clique: {members}", file=sys.stderr)
    return 0


def cmd_detect(a):
    if not 0 < a.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    if a.model in ("sbm", "dcsbm", "pabm") and a.k is None:
        raise UsageError(f"--model {a.model} needs --k")
    _jit.set_threads(a.threads)
    g, labels = read_edge_list(a.input)
    fm = fit_model(g, a.model, a.k, seed=a.seed)
    rep = detect(g, fm, a.alpha, labels=labels)
    lines = [
        f"model: {a.model}",
        f"nodes: {g.n}",
        f"reject: {str(rep.reject).lower()}",
        f"T_n: {rep.t_n:.6g}",
        f"threshold: {rep.threshold:.6g}",
        f"flagged: {' '.join(rep.flagged_labels())}",
    ]
    extra = {}
    if a.chi2:
        c = chi2_detect(g, fm, a.alpha, seed=a.seed)
        extra["chi2"] = c
        lines += [f"chi2_statistic: {c.statistic:.6g}", f"chi2_critical: {c.critical_value:.6g}",
                  f"chi2_reject: {str(c.reject).lower()}"]
    sys.stdout.write("\n".join(lines) + "\n")
    if a.out:
        meta = {"seed": a.seed, "config": {"model": a.model, "k": a.k, "alpha": a.alpha,
                                           "input": str(a.input), "chi2": a.chi2}}
        write_report(rep, a.out, meta=meta, extra=extra)
    return 0


def cmd_recover(a):
    g, labels = read_edge_list(a.input)
    if a.report:
        names = read_document(a.report)["report"]["flagged"]
    else:
        names = a.flagged
    pos = {lab: i for i, lab in enumerate(labels)}
    missing = [x for x in names if x not in pos]
    if missing:
        raise EdgeListError(0, f"flagged labels not in graph: {missing}")
    clique = recover_clique(g, [pos[x] for x in names])
    _emit(" ".join(labels[i] for i in clique) + "\n", a.out)
    return 0


def cmd_simulate(a):
    if a.suite == "paper":
        if not 0 < a.scale <= 1:
            raise UsageError("--scale must lie in (0, 1]")
        summary = paper_suite(a.scale, a.seed, a.threads)
    else:
        if a.model is None:
            raise UsageError("give --suite paper or --model")
        configs = [SimConfig(a.model, n, tuple(a.m), tuple(a.alpha), a.replicates, a.seed,
                             tuple(a.detectors), a.k) for n in a.n]
        summary = simulate(configs, a.threads)
    sys.stdout.write(format_tables(summary) + "\n")
    if a.out:
        write_report(summary, a.out, meta={"seed": a.seed, "threads": a.threads})
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "embed-clique": cmd_embed,
    "detect": cmd_detect,
    "recover-clique": cmd_recover,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"egoclique: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeListError, FitError, ValueError, IndexError, OSError) as exc:
        print(f"egoclique: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
