"""Command-line entry point: ``fairbreak <subcommand> ...``.

Exit codes: 0 on success, 1 when a verification suite fails or a
computation is undefined, 2 on unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiment, verify
from .classifiers import load_model, save_model
from .datagen import SyntheticConfig, generate_synthetic
from .dataset import load_dataset_csv, save_dataset_csv
from .distributions import load_distribution_csv, save_distribution_csv
from .empirical_attack import random_flip_attack, z_flip_attack
from .errors import FairbreakError, FormatError
from .fair_boundary import GaussianMixture, find_fair_direction
from .learners import (
    FermConfig,
    ftrm_threshold_exact,
    train_erm,
    train_ferm_penalized,
    train_ferm_relaxed_detailed,
)
from .metrics import DP, EO, fairness_gap, risk
from .optimal_attack import two_stage_attack

EXIT_FAIL = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad or unreadable input file."""


def _load(fn, path):
    try:
        return fn(path)
    except (OSError, FormatError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _default_test_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(f"{p.stem}_test{p.suffix or '.csv'}")


def cmd_gen(args) -> int:
    cfg = _load(SyntheticConfig.from_json, args.config) if args.config else SyntheticConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    train, test = generate_synthetic(cfg)
    save_dataset_csv(train, args.out)
    test_path = args.test_out or _default_test_path(args.out)
    save_dataset_csv(test, test_path)
    print(f"train: {len(train)} samples -> {args.out}")
    print(f"test: {len(test)} samples -> {test_path}")
    return 0


def _attack_optimal(args) -> int:
    d = _load(load_distribution_csv, args.inp)
    h = _load(load_model, args.model)
    out = two_stage_attack(d, h, margin=args.margin, criterion=args.criterion)
    save_distribution_csv(out.stage2, args.out)
    print(f"case={out.transport.case.name.lower()} fraction={out.transport.fraction!r}")
    print(f"tv_stage1={out.tv_stage1!r} tv_stage2={out.tv_stage2!r} tv_total={out.tv_total!r}")
    return 0


def cmd_attack(args) -> int:
    if args.mode == "optimal":
        if not args.model:
            raise InputError("--mode optimal needs --model")
        return _attack_optimal(args)
    d = _load(load_dataset_csv, args.inp)
    if args.attack == "zflip":
        if args.budget is not None:
            raise InputError("zflip computes its own flip count; drop --budget")
        h = _load(load_model, args.model) if args.model else train_erm(d, FermConfig(seed=args.seed))
        rep = z_flip_attack(d, h, rng_seed=args.seed, criterion=args.criterion)
    else:
        if args.budget is None:
            raise InputError(f"{args.attack} needs --budget")
        h = _load(load_model, args.model) if args.model else None
        rep = random_flip_attack(d, args.attack[4:], args.budget, rng_seed=args.seed, h=h,
                                 criterion=args.criterion)
    if rep.flipped_indices:
        save_dataset_csv(rep.poisoned, args.out)
    elif Path(args.inp).resolve() != Path(args.out).resolve():
        # nothing flipped: keep the input bytes untouched
        shutil.copyfile(args.inp, args.out)
    text = rep.to_text()
    if args.report:
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    d = _load(load_dataset_csv, args.inp)
    cfg = FermConfig(penalty_weight=args.penalty, delta=args.delta, criterion=args.criterion,
                     seed=args.seed)
    if args.learner == "erm":
        model = train_erm(d, cfg)
    elif args.learner == "fc":
        model = train_ferm_penalized(d, cfg)
    elif args.learner == "errtol":
        res = train_ferm_relaxed_detailed(d, cfg)
        model = res.model
        print(f"penalty_weight={res.penalty_weight!r} train_gap={res.train_gap!r}"
              f" fallback={str(res.fallback).lower()}")
    else:
        model = ftrm_threshold_exact(d, args.delta, args.criterion)
    save_model(model, args.out)
    print(f"model -> {args.out}")
    return 0


def _gap_text(h, d, crit) -> str:
    try:
        return repr(fairness_gap(h, d, crit))
    except FairbreakError:
        return "undefined"


def cmd_eval(args) -> int:
    d = _load(load_dataset_csv, args.inp)
    h = _load(load_model, args.model)
    print(f"n_samples={len(d)}")
    print(f"accuracy={1.0 - risk(h, d)!r}")
    print(f"eo_gap={_gap_text(h, d, EO)}")
    print(f"dp_gap={_gap_text(h, d, DP)}")
    return 0


def cmd_repro(args) -> int:
    cfg = _load(experiment.ExperimentConfig.from_json, args.config) if args.config \
        else experiment.ExperimentConfig()
    if args.seeds:
        cfg = replace(cfg, seeds=tuple(args.seeds))
    if args.penalty is not None:
        cfg = replace(cfg, fc_penalty=args.penalty)
    if args.learner:
        cfg = replace(cfg, learners=tuple(args.learner))
    if args.attack:
        cfg = replace(cfg, attacks=tuple(args.attack))
    cfg = replace(cfg, criterion=args.criterion)
    rows = experiment.summarize(experiment.run_experiment(cfg), cfg)
    text = experiment.table_text(rows, cfg)
    sys.stdout.write(text)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "table1.csv").write_text(experiment.table_csv(rows))
        (out / "table1.txt").write_text(text)
    return 0


def cmd_verify(args) -> int:
    names = args.suite or list(verify.SUITES)
    unknown = set(names) - set(verify.SUITES)
    if unknown:
        raise InputError(f"unknown suites {sorted(unknown)}; choose from {list(verify.SUITES)}")
    ok = True
    for name in names:
        res = verify.SUITES[name](seed=args.seed)
        print(res.summary())
        for note in res.notes:
            print(f"  note: {note}")
        ok &= res.passed
    return 0 if ok else EXIT_FAIL


def _mixture(spec) -> GaussianMixture:
    try:
        return GaussianMixture(tuple(spec["weights"]), tuple(map(tuple, spec["means"])),
                               tuple(tuple(map(tuple, c)) for c in spec["covs"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad mixture specification: {exc}") from exc


def cmd_fair_boundary(args) -> int:
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{args.config}: {exc}") from exc
        g0, g1 = _mixture(raw["g0"]), _mixture(raw["g1"])
        if args.criterion is DP:
            # groups given Y=1 are mixed with their Y=0 parts by Pr(Y=1 | Z=z)
            g0 = g0.combine(_mixture(raw["g0_y0"]), raw["p_y1_z0"])
            g1 = g1.combine(_mixture(raw["g1_y0"]), raw["p_y1_z1"])
        anchors = raw.get("anchors", [[0.0, 0.0]])
    else:
        rng = np.random.default_rng(args.seed)
        g0, g1 = verify.random_mixture(rng), verify.random_mixture(rng)
        anchors = rng.uniform(-2, 2, size=(3, 2)).tolist()
    if args.anchor:
        anchors = [[float(v) for v in a.split(",")] for a in args.anchor]
    print("anchor_x1,anchor_x2,theta,residual")
    for a in anchors:
        r = find_fair_direction(g0, g1, a, args.tol)
        print(f"{r.anchor[0]!r},{r.anchor[1]!r},{r.theta!r},{r.residual!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairbreak", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_default=0):
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--criterion", choices=["eo", "dp"], default="eo")

    g = sub.add_parser("gen", help="generate the synthetic train/test split")
    g.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    g.add_argument("--config", help="JSON file with SyntheticConfig fields")
    g.add_argument("--out", required=True, help="training CSV")
    g.add_argument("--test-out", help="test CSV (default: <out>_test.csv)")
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("attack", help="poison a dataset or a distribution")
    common(a)
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--attack", choices=["zflip", "randY", "randZ", "randYZ"], default="zflip")
    a.add_argument("--budget", type=int, help="flip count for random attacks")
    a.add_argument("--model", help="target model (default: ERM trained on the input)")
    a.add_argument("--mode", choices=["empirical", "optimal"], default="empirical",
                   help="optimal: two-stage attack on a distribution CSV")
    a.add_argument("--margin", type=float, default=0.1)
    a.add_argument("--report", help="write the attack report here too")
    a.set_defaults(func=cmd_attack)

    t = sub.add_parser("train", help="fit a learner")
    common(t)
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--out", required=True, help="model file")
    t.add_argument("--learner", choices=list(experiment.LEARNERS), default="erm")
    t.add_argument("--penalty", type=float, default=experiment.DEFAULT_FC_PENALTY)
    t.add_argument("--delta", type=float, default=0.0)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="accuracy and fairness gaps of a model")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--model", required=True)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("repro-table1", help="attack x learner comparison over seeds")
    r.add_argument("--criterion", choices=["eo", "dp"], default="eo")
    r.add_argument("--config", help="JSON file with ExperimentConfig fields")
    r.add_argument("--seeds", type=int, nargs="+")
    r.add_argument("--attack", nargs="+", choices=list(experiment.ATTACKS))
    r.add_argument("--learner", nargs="+", choices=list(experiment.LEARNERS))
    r.add_argument("--penalty", type=float, help="FC penalty weight")
    r.add_argument("--out-dir", help="write table1.csv and table1.txt here")
    r.set_defaults(func=cmd_repro)

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--suite", nargs="+", help=f"subset of {', '.join(verify.SUITES)}")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fair-boundary", help="fair linear boundaries through anchors")
    common(f)
    f.add_argument("--config", help="JSON with mixtures g0, g1 (and Y=0 parts for dp)")
    f.add_argument("--anchor", action="append", help="x1,x2 (repeatable)")
    f.add_argument("--tol", type=float, default=1e-10)
    f.set_defaults(func=cmd_fair_boundary)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "criterion"):
        args.criterion = EO if args.criterion == "eo" else DP
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FairbreakError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
