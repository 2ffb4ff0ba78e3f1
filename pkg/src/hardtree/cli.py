"""Command-line front end.

Every command writes its outputs into ``--out`` (default: ``$HARDTREE_OUT``
or the working directory).  Outputs are first written to temporary files
and renamed into place only once all of them are complete.

A ``--config`` file holds ``key = value`` lines mirroring the long flags
(``#`` starts a comment); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import CoefficientField, read_csv, squared_norm, to_csv_text
from .estimators import Threshold, hard_threshold, hard_tree
from .harness import (
    DEFAULT_EPSILONS,
    DEFAULT_REPLICATES,
    compare_rules,
    curves_from_rows,
    eta_embedding,
    rate_fit,
    risk_curve,
    target_exponent,
    tree_vs_weak_embedding,
)
from .noise import NoiseConfig, default_m, observe, replicate_rng
from .spaces import (
    HFunctionParams,
    besov_stat,
    hybrid_besov_stat,
    lambda_grid,
    make_h_function,
    sparsity_stat,
    tree_weak_besov_stat,
    weak_besov_stat,
)
from .transform import WaveletBasis, analyze, synthesize

log = logging.getLogger("hardtree")

OUT_ENV = "HARDTREE_OUT"


class CliError(Exception):
    pass


# helpers --------------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip text for a number; strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_outputs(out_dir: Path, files: dict[str, str]) -> list[Path]:
    """Write every file to a temporary name, then rename all into place."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            staged.append((tmp, out_dir / name))
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)
    return [dest for _, dest in staged]


def read_samples(path: Path) -> np.ndarray:
    """One number per line; blank lines and ``#`` comments ignored."""
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise CliError(f"{path}:{lineno}: not a number: {line!r}") from None
    return np.array(vals)


def samples_text(x: np.ndarray) -> str:
    return "".join(fmt(v) + "\n" for v in x)


def looks_like_coefficients(path: Path) -> bool:
    with open(path) as fh:
        first = fh.readline()
    return first.replace(" ", "").strip().lower() == "level,position,value"


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def parse_levels(text: str) -> list[int]:
    """``8..16`` (inclusive) or ``8,10,12``."""
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def parse_grid(text: str | None) -> np.ndarray:
    if not text:
        return lambda_grid()
    return np.array(parse_floats(text))


def read_config(path: Path) -> dict[str, str]:
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def truth_field(args) -> CoefficientField:
    if not args.truth:
        raise CliError("--truth is required")
    return read_csv(args.truth)


def noise_config(args, rule: str) -> NoiseConfig:
    if args.epsilon is None:
        raise CliError("--epsilon is required")
    m = args.m if args.m is not None else default_m(rule, args.eta)
    return NoiseConfig(args.epsilon, m, args.eta)


# commands -------------------------------------------------------------------

def cmd_denoise(args) -> dict[str, str]:
    path = Path(args.input)
    basis = WaveletBasis.from_name(args.basis)
    from_samples = (args.input_format == "samples" or
                    (args.input_format == "auto" and not looks_like_coefficients(path)))
    if from_samples:
        y = analyze(read_samples(path), basis)
    else:
        y = read_csv(path)
    if args.lam is not None:
        thr = Threshold(args.lam, args.eta)
    else:
        thr = noise_config(args, args.rule)
        if thr.degenerate:
            raise CliError(f"threshold {thr.lam} >= 1: nothing to estimate")
    rule = hard_tree if args.rule == "tree" else hard_threshold
    res = rule(y, thr)
    mask_rows = [(j, k, bool(g[k])) for j, g in enumerate(res.mask.gamma)
                 for k in range(g.size)]
    files = {
        "estimate.csv": to_csv_text(res.estimate),
        "mask.csv": csv_text(("level", "position", "keep"), mask_rows),
        "denoise.json": json_text({
            "rule": args.rule, "lambda": res.lam, "j_lambda": res.j_lambda,
            "kept": res.mask.count(), "basis": basis.name,
        }),
    }
    if from_samples:
        # levels at and past the cutoff are zero; synthesize at the input length
        full = res.estimate.padded(y.max_level)
        files["estimate_samples.txt"] = samples_text(synthesize(full, basis))
    return files


def cmd_simulate(args) -> dict[str, str]:
    truth = truth_field(args)
    cfg = noise_config(args, args.rule)
    if cfg.degenerate:
        raise CliError(f"threshold {cfg.lam} >= 1: no detail level to observe")
    y = observe(truth, cfg, replicate_rng(args.seed, args.replicate))
    return {
        "observations.csv": to_csv_text(y),
        "simulate.json": json_text({
            "epsilon": cfg.epsilon, "m": cfg.m, "eta": cfg.eta, "lambda": cfg.lam,
            "j_lambda": cfg.j_lambda, "seed": args.seed, "replicate": args.replicate,
        }),
    }


def cmd_spaces(args) -> dict[str, str]:
    field = read_csv(args.input)
    grid = parse_grid(args.lambda_grid)
    stat = args.stat
    if stat == "besov":
        res = besov_stat(field, args.s)
    elif stat == "hybrid":
        res = hybrid_besov_stat(field, args.u)
    elif stat == "weak":
        res = weak_besov_stat(field, args.r, grid)
    elif stat == "treeweak":
        res = tree_weak_besov_stat(field, args.r, args.eta, grid)
    else:
        res = sparsity_stat(field, args.eta, grid)
    index = "J" if stat in ("besov", "hybrid") else "lambda"
    grid_vals = [int(g) for g in res.grid] if index == "J" else list(res.grid)
    values = ([int(v) for v in res.values] if stat == "count" else list(res.values))
    return {
        f"{stat}.csv": csv_text((index, "value"), zip(grid_vals, values)),
        f"{stat}.json": json_text({"stat": stat, "sup": res.sup, "argsup": res.argsup,
                                   "squared_norm": squared_norm(field)}),
    }


def cmd_hfun(args) -> dict[str, str]:
    params = HFunctionParams(args.hm, args.alpha, args.alpha1, args.alpha2, args.levels)
    return {"hfun.csv": to_csv_text(make_h_function(params))}


def _epsilons(args) -> list[float]:
    return parse_floats(args.epsilons) if args.epsilons else list(DEFAULT_EPSILONS)


def _fit_summary(curve) -> dict:
    try:
        f = rate_fit(curve)
    except ValueError as exc:
        return {"error": str(exc)}
    return {"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared,
            "n_points": f.n_points}


def cmd_risk_curve(args) -> dict[str, str]:
    truth = truth_field(args)
    m = args.m if args.m is not None else default_m(args.rule, args.eta)
    curve = risk_curve(truth, args.rule, _epsilons(args), m, args.eta,
                       args.replicates, args.seed)
    rows = [(p_eps, p.lam, p.j_lambda, p.mean, p.stderr, p.detail_mean, p.truncation)
            for p_eps, p in zip(curve.epsilons, curve.points)]
    summary = {"rule": args.rule, "m": m, "eta": args.eta, "seed": args.seed,
               "replicates": args.replicates, "fit": _fit_summary(curve)}
    if args.s is not None:
        summary["target_slope"] = target_exponent(args.s)
    return {
        "risk_curve.csv": csv_text(("epsilon", "lambda", "j_lambda", "risk", "stderr",
                                    "detail_risk", "truncation"), rows),
        "risk_curve.json": json_text(summary),
    }


def cmd_compare(args) -> dict[str, str]:
    truth = truth_field(args)
    rows = compare_rules(truth, _epsilons(args), args.eta, args.replicates, args.seed,
                         args.m_tree, args.m_hard, args.matched_m)
    table = [(r.epsilon, r.lambda_tree, r.lambda_hard, r.risk_tree.mean,
              r.risk_tree.stderr, r.risk_hard.mean, r.risk_hard.stderr, r.ratio,
              r.mean_extra_kept) for r in rows]
    curves = curves_from_rows(rows)
    summary = {"eta": args.eta, "seed": args.seed, "replicates": args.replicates,
               "matched_m": args.matched_m,
               "fit_tree": _fit_summary(curves["tree"]),
               "fit_hard": _fit_summary(curves["hard"]),
               "max_ratio": max(r.ratio for r in rows)}
    if args.s is not None:
        summary["target_slope"] = target_exponent(args.s)
    return {
        "compare.csv": csv_text(("epsilon", "lambda_tree", "lambda_hard", "risk_tree",
                                 "stderr_tree", "risk_hard", "stderr_hard", "ratio",
                                 "extra_kept"), table),
        "compare.json": json_text(summary),
    }


def cmd_embeddings(args) -> dict[str, str]:
    levels = parse_levels(args.level_range)
    s = args.s if args.s is not None else 0.5
    reports = [tree_vs_weak_embedding(s, args.eta, levels, parse_grid(args.lambda_grid)),
               eta_embedding(s, args.eta1, args.eta2, levels)]
    rows = []
    for rep in reports:
        for L, g, b in zip(rep.levels, rep.growing, rep.bounded):
            rows.append((rep.name, L, g, b))
    return {
        "embeddings.csv": csv_text(("experiment", "level", "growing", "bounded"),
                                   rows),
        "embeddings.json": json_text({rep.name: rep.to_dict() for rep in reports}),
    }


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardtree",
                                description="Hard tree and hard threshold wavelet denoising.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, noise=True):
        sp.add_argument("--config", type=Path, help="key = value file mirroring the flags")
        sp.add_argument("--out", type=Path, default=None, help=f"output directory (env {OUT_ENV})")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-v", "--verbose", action="store_true")
        if noise:
            sp.add_argument("--epsilon", type=float)
            sp.add_argument("--m", type=float, help="threshold constant (default: per rule)")
            sp.add_argument("--eta", type=float, default=1.0)

    sp = sub.add_parser("denoise", help="apply a rule to observed coefficients or samples")
    common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--input-format", choices=("auto", "coef", "samples"), default="auto")
    sp.add_argument("--basis", default="haar", help="haar or dbN")
    sp.add_argument("--rule", choices=("tree", "hard"), default="tree")
    sp.add_argument("--lambda", dest="lam", type=float, help="threshold given directly")
    sp.set_defaults(func=cmd_denoise)

    sp = sub.add_parser("simulate", help="noisy observations of a truth field")
    common(sp)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--rule", choices=("tree", "hard"), default="tree",
                    help="selects the default m")
    sp.add_argument("--replicate", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("spaces", help="sequence-space statistics of a field")
    common(sp, noise=False)
    sp.add_argument("--input", required=True)
    sp.add_argument("--stat", choices=("besov", "weak", "treeweak", "hybrid", "count"),
                    required=True)
    sp.add_argument("--s", type=float, default=0.5)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--u", type=float, default=0.25)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--lambda-grid", help="comma-separated values (default: geometric grid)")
    sp.set_defaults(func=cmd_spaces)

    sp = sub.add_parser("hfun", help="coefficients of h[m, alpha, alpha1, alpha2]")
    common(sp, noise=False)
    sp.add_argument("--m", dest="hm", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--alpha1", type=float, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--levels", type=int, required=True)
    sp.set_defaults(func=cmd_hfun)

    for name, func, help_ in (("risk-curve", cmd_risk_curve, "Monte Carlo risk over an epsilon grid"),
                              ("compare", cmd_compare, "paired risk comparison of both rules")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--truth", required=True)
        sp.add_argument("--epsilons", help="comma-separated (default 2^-4..2^-9)")
        sp.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
        sp.add_argument("--s", type=float, help="smoothness for the target slope in the summary")
        if name == "risk-curve":
            sp.add_argument("--rule", choices=("tree", "hard"), default="tree")
        else:
            sp.add_argument("--m-tree", type=float)
            sp.add_argument("--m-hard", type=float)
            sp.add_argument("--matched-m", action="store_true")
        sp.set_defaults(func=func)

    sp = sub.add_parser("embeddings", help="separation of space statistics on witness sequences")
    common(sp, noise=False)
    sp.add_argument("--s", type=float, default=0.5)
    sp.add_argument("--eta", type=float, default=2.0)
    sp.add_argument("--eta1", type=float, default=1.0)
    sp.add_argument("--eta2", type=float, default=2.0)
    sp.add_argument("--level-range", default="8..16")
    sp.add_argument("--lambda-grid")
    sp.set_defaults(func=cmd_embeddings)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known_args, _ = pre.parse_known_args(argv)
    commands = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if not a.startswith("-")), None)
    if known_args.config is None or command not in commands:
        return parser.parse_args(argv)
    sub = commands[command]
    cfg = read_config(known_args.config)
    actions = {a.dest: a for a in sub._actions}
    aliases = {"lambda": "lam", "m": "hm"} if command == "hfun" else {"lambda": "lam"}
    defaults = {}
    for key, value in cfg.items():
        dest = aliases.get(key, key)
        if dest not in actions or dest in ("config", "help"):
            raise CliError(f"{known_args.config}: unknown key {key!r} for {command}")
        action = actions[dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[dest] = action.type(value)
        else:
            defaults[dest] = value
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        out = args.out or Path(os.environ.get(OUT_ENV, "."))
        files = args.func(args)
        for path in write_outputs(Path(out), files):
            log.info("wrote %s", path)
    except (CliError, ValueError, OSError) as exc:
        print(f"hardtree: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
