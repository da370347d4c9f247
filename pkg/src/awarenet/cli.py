"""Command-line experiment driver.

Subcommands: gen-data, gen-network, estimate, brd, welfare, verify-csf,
reproduce-example1.  Every command is driven by a JSON config (plus
--seed/--out/--threads overrides), embeds the config hash and seed in its
outputs, and exits 0 on success, 1 on validation errors, 2 on runtime
failures.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import example1
from .csf import check_assumptions, make_csf
from .estimate import TRAINING_CUT_DATE
from .experiments import (
    DEFAULT_BIASED_MASS,
    pipeline_network,
    run_brd_batch,
    validation_experiment,
)
from .game import BudgetProfile, GameConfig, brd_run, verify_nash
from .network import NetworkFormatError, load_network, load_network_csv, save_network
from .synthgen import (
    ContactMatrix,
    GenParams,
    default_contact_matrix,
    generate_population,
    ic_diffuse,
    sample_network,
)
from .welfare import WelfareSpec, price_of_anarchy, welfare_optimize

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class ConfigError(ValueError):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _resolve_seed(config: dict, args) -> int:
    if args.seed is not None:
        return int(args.seed)
    if "seed" in config:
        return int(config["seed"])
    seed = int(np.random.SeedSequence().entropy % (2**63))
    print(f"seed not specified; using generated seed {seed}")
    return seed


def _provenance(config: dict, seed: int) -> dict:
    return {"config_hash": _config_hash(config), "seed": seed}


def _write_json(path: Path, doc: dict, config: dict, seed: int):
    doc = {"provenance": _provenance(config, seed), **doc}
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def _csv_comment(config: dict, seed: int) -> str:
    prov = _provenance(config, seed)
    return f"config_hash={prov['config_hash']} seed={prov['seed']}"


def _gen_params(block: dict) -> GenParams:
    known = {
        "mu_deg", "beta_a", "beta_b", "p0", "n_products", "gap_days",
        "noise_sigma", "launch_date", "horizon_end",
    }
    unknown = set(block) - known - {"n", "contact_csv"}
    if unknown:
        raise ConfigError(f"unknown generation parameters: {sorted(unknown)}")
    kwargs = {k: block[k] for k in known & set(block)}
    for key in ("launch_date", "horizon_end"):
        if key in kwargs:
            kwargs[key] = dt.date.fromisoformat(kwargs[key])
    try:
        return GenParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _contact(block: dict) -> ContactMatrix:
    if "contact_csv" in block:
        return ContactMatrix.read_csv(block["contact_csv"])
    return default_contact_matrix()


def _csf(config: dict):
    block = config.get("csf")
    if not block or "family" not in block:
        raise ConfigError("config needs a 'csf' block with a 'family'")
    try:
        return make_csf(
            block["family"],
            delta=float(block.get("delta", 0.5)),
            q=float(block.get("q", 1.0)),
            k=float(block.get("k", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _network(config: dict, seed: int, out: Path):
    block = config.get("network")
    if not block:
        raise ConfigError("config needs a 'network' block ('path', 'csv' or 'generate')")
    alpha = float(block.get("alpha", 0.5))
    if "path" in block:
        return load_network(block["path"])
    if "csv" in block:
        return load_network_csv(block["csv"], alpha=alpha)
    if "generate" in block:
        gen = block["generate"]
        params = _gen_params(gen)
        n = int(gen.get("n", 100))
        arts = pipeline_network(n, params, alpha, seed, contact=_contact(gen))
        save_network(arts.network, out / "estimated_network.json")
        print(f"wrote {out / 'estimated_network.json'}")
        return arts.network
    raise ConfigError("network block needs 'path', 'csv', or 'generate'")


def _game_config(config: dict, net, csf) -> GameConfig:
    block = config.get("game", {})
    try:
        return GameConfig(
            net=net,
            csf=csf,
            m=int(block.get("m", 2)),
            C=float(block.get("C", 1.0)),
            gamma=float(block.get("gamma", 1e-4)),
            K=int(block.get("K", 5000)),
            eps=float(block.get("eps", 1e-6)),
            projection_mode=block.get("projection_mode", "euclidean"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _welfare_specs(config: dict) -> dict[str, WelfareSpec]:
    block = config.get("welfare", {"p": [1, 0, "-inf"]})
    ps = block.get("p", [1, 0, "-inf"])
    if not isinstance(ps, list):
        ps = [ps]
    specs = {}
    for p in ps:
        try:
            spec = WelfareSpec.from_config(p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        specs[spec.label()] = spec
    return specs


def cmd_gen_data(config: dict, seed: int, out: Path, threads: int) -> int:
    block = config.get("generate", config.get("data", {}))
    n = int(block.get("n", 100))
    if n < 1:
        raise ConfigError(f"population size must be >= 1, got {n}")
    params = _gen_params(block)
    contact = _contact(block)
    ss = np.random.SeedSequence(seed).spawn(3)
    pop = generate_population(n, params, ss[0])
    graph = sample_network(pop, contact, params, ss[1])
    log = ic_diffuse(graph, params, ss[2])
    comment = _csv_comment(config, seed)
    out.mkdir(parents=True, exist_ok=True)
    pop.write_csv(out / "customers.csv", header_comment=comment)
    log.write_csv(out / "holdings.csv", header_comment=comment)
    contact.write_csv(out / "contact_matrix.csv")
    jj, ii = np.nonzero(graph.weights)
    _write_json(
        out / "aux_graph.json",
        {
            "n": n,
            "alpha": float(config.get("network", {}).get("alpha", 0.5)),
            "edges": [[int(j), int(i), float(graph.weights[j, i])] for j, i in zip(jj, ii)],
        },
        config,
        seed,
    )
    print(f"wrote {out / 'customers.csv'} ({n} customers)")
    print(f"wrote {out / 'holdings.csv'} ({int(log.adopted.sum())} adoption events)")
    print(f"seed {seed}")
    return EXIT_OK


def cmd_gen_network(config: dict, seed: int, out: Path, threads: int) -> int:
    block = config.get("generate", {})
    n = int(block.get("n", 100))
    params = _gen_params(block)
    alpha = float(config.get("network", {}).get("alpha", 0.5))
    arts = pipeline_network(n, params, alpha, seed, contact=_contact(block))
    save_network(arts.network, out / "estimated_network.json", extra=_provenance(config, seed))
    print(f"wrote {out / 'estimated_network.json'} (n={n}, alpha={alpha})")
    return EXIT_OK


def cmd_estimate(config: dict, seed: int, out: Path, threads: int) -> int:
    block = config.get("generate", {})
    n = int(block.get("n", 2000))
    params = _gen_params(block)
    reps = int(config.get("repetitions", 1))
    cut = dt.date.fromisoformat(config["cut_date"]) if "cut_date" in config else TRAINING_CUT_DATE
    report = validation_experiment(
        n, params, reps, seed, contact=_contact(block), cut_date=cut, threads=threads
    )
    arts = pipeline_network(n, params, float(config.get("network", {}).get("alpha", 0.5)),
                            seed, contact=_contact(block))
    save_network(arts.network, out / "estimated_network.json", extra=_provenance(config, seed))
    _write_json(out / "validation_report.json", report, config, seed)
    print(
        f"mean accuracy {report['mean_accuracy']:.2f}% +- {report['std']:.2f} "
        f"over {reps} runs (pending-pairs accuracy {report['mean_accuracy_pending']:.2f}%)"
    )
    return EXIT_OK


def cmd_brd(config: dict, seed: int, out: Path, threads: int) -> int:
    net = _network(config, seed, out)
    csf = _csf(config)
    cfg = _game_config(config, net, csf)
    specs = _welfare_specs(config)
    reps = int(config.get("repetitions", 1))
    mass = float(config.get("init", {}).get("mass", DEFAULT_BIASED_MASS))
    batch = run_brd_batch(cfg, specs, reps, seed, biased_mass=mass, threads=threads)

    out.mkdir(parents=True, exist_ok=True)
    comment = _csv_comment(config, seed)
    agg_path = out / "welfare_ratio_aggregate.csv"
    with open(agg_path, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        labels = [lab for lab in specs if batch.curves[lab] is not None]
        header = ["k"]
        for lab in labels:
            header += [f"{lab}_mean", f"{lab}_std", f"{lab}_min", f"{lab}_max"]
        w.writerow(header)
        length = max((len(batch.curves[lab]["mean"]) for lab in labels), default=0)
        for k in range(length):
            row = [k]
            for lab in labels:
                c = batch.curves[lab]
                row += [f"{c[key][k]:.8g}" for key in ("mean", "std", "min", "max")]
            w.writerow(row)
    print(f"wrote {agg_path}")

    final_doc = {
        "w_opt": {k: v for k, v in batch.w_opt.items()},
        "terminal_ratio_mean": {
            lab: batch.terminal_mean(lab) for lab in specs if batch.curves[lab] is not None
        },
        "terminal_ratio_std": {
            lab: batch.terminal_std(lab) for lab in specs if batch.curves[lab] is not None
        },
        "repetitions": reps,
        "init_kinds": batch.init_kinds,
        "converged": batch.converged.tolist(),
        "final_budgets": [p.B.tolist() for p in batch.final_profiles],
    }
    _write_json(out / "final_budgets.json", final_doc, config, seed)

    # one representative trace with full per-iteration columns
    rng = np.random.default_rng(seed)
    from .experiments import InitMode, init_budgets

    prof0 = init_budgets(InitMode("uniform"), cfg.m, cfg.n, cfg.C, rng)
    lab0, spec0 = next(iter(specs.items()))
    wref = batch.w_opt[lab0]
    trace = brd_run(cfg, prof0, W_ref=wref, welfare_spec=spec0 if wref else None)
    trace_path = out / "trace_uniform.csv"
    with open(trace_path, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["k", "firm", "utility", "grad_norm", "welfare_ratio"])
        for row in trace.csv_rows():
            w.writerow(row)
    print(f"wrote {trace_path}")
    for lab in specs:
        if batch.curves[lab] is None:
            print(f"{lab}: welfare optimum undefined on this game; ratios omitted")
        else:
            print(
                f"{lab}: terminal R mean {batch.terminal_mean(lab):.4f} "
                f"std {batch.terminal_std(lab):.4f} (W_opt {batch.w_opt[lab]:.6g})"
            )
    return EXIT_OK


def cmd_welfare(config: dict, seed: int, out: Path, threads: int) -> int:
    net = _network(config, seed, out)
    csf = _csf(config)
    cfg = _game_config(config, net, csf)
    specs = _welfare_specs(config)
    reps = int(config.get("repetitions", 5))
    mass = float(config.get("init", {}).get("mass", DEFAULT_BIASED_MASS))
    nash_tol = float(config.get("nash_tol", 0.01))

    batch = run_brd_batch(cfg, {}, reps, seed, biased_mass=mass, threads=threads)
    ne_set, rejected = [], 0
    for prof in batch.final_profiles:
        if verify_nash(cfg, prof, tol=nash_tol).is_nash:
            ne_set.append(prof)
        else:
            rejected += 1

    doc: dict = {"equilibria_found": len(ne_set), "equilibria_rejected": rejected}
    for lab, spec in specs.items():
        try:
            b_opt, w_opt = welfare_optimize(cfg, spec, seed=seed)
        except ArithmeticError as exc:
            doc[lab] = {"defined": False, "reason": str(exc)}
            continue
        entry = {"w_opt": w_opt, "b_opt": b_opt.B.tolist(), "defined": True}
        if ne_set:
            poa = price_of_anarchy(cfg, spec, ne_set, w_opt=w_opt, b_opt=b_opt)
            entry["poa"] = poa.poa
            entry["w_worst_ne"] = poa.w_worst_ne
            entry["poa_defined"] = poa.defined
        doc[lab] = entry
    _write_json(out / "welfare_report.json", doc, config, seed)
    for lab in specs:
        entry = doc[lab]
        if entry.get("defined") and "poa" in entry and entry["poa"] is not None:
            print(f"{lab}: W_opt {entry['w_opt']:.6g}  PoA {entry['poa']:.4f}")
        elif entry.get("defined"):
            print(f"{lab}: W_opt {entry['w_opt']:.6g}  (no verified equilibria for PoA)")
        else:
            print(f"{lab}: welfare undefined on this game")
    return EXIT_OK


def cmd_verify_csf(config: dict, seed: int, out: Path, threads: int) -> int:
    csf = _csf(config)
    block = config.get("audit", {})
    report = check_assumptions(
        csf,
        m=int(block.get("m", config.get("game", {}).get("m", 2))),
        grid=float(block.get("grid", 0.05)),
        alpha_steps=tuple(block.get("alpha_steps", (0.05, 0.1, 0.2))),
    )
    print(f"audit of {csf.label()} with m={report.m}, grid={report.grid}:")
    for line in report.summary_lines():
        print("  " + line)
    _write_json(
        out / "csf_audit.json",
        {
            "csf": csf.label(),
            "m": report.m,
            "grid": report.grid,
            "alpha_steps": list(report.alpha_steps),
            "concavity_ok": report.concavity_ok,
            "substitutability_ok": report.substitutability_ok,
            "dominance_ok": report.dominance_ok,
            "witnesses": {
                k: [[list(map(str, cfg_)), val] for cfg_, val in v]
                for k, v in report.witnesses.items()
            },
        },
        config,
        seed,
    )
    return EXIT_OK


def cmd_reproduce_example1(config: dict, seed: int, out: Path, threads: int) -> int:
    report = example1.run_report(seed=seed)
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['quantity']}")
    print(f"{report['n_pass']}/{report['n_total']} reference quantities reproduced")
    _write_json(out / "example1_report.json", report, config, seed)
    return EXIT_OK


_COMMANDS = {
    "gen-data": cmd_gen_data,
    "gen-network": cmd_gen_network,
    "estimate": cmd_estimate,
    "brd": cmd_brd,
    "welfare": cmd_welfare,
    "verify-csf": cmd_verify_csf,
    "reproduce-example1": cmd_reproduce_example1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="awarenet",
        description="Experiment driver for competitive awareness games on networks",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON experiment configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="repetition parallelism")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        seed = _resolve_seed(config, args)
        code = _COMMANDS[args.command](config, seed, Path(args.out), max(args.threads, 1))
    except (ConfigError, NetworkFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return code


if __name__ == "__main__":
    sys.exit(main())
