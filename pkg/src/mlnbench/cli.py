"""Command-line entry point.

Exit codes: 0 success, 1 unexpected error, 2 invalid configuration,
3 generation infeasible.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .communities import build_reference_layer
from .core import (ConfigError, GenerationInfeasible, NetworkFormatError, format_matrix,
                   read_config, read_labelled_network, read_network_dir, validate_config,
                   write_config, write_degree_file, write_network, write_size_file)
from .correlate import write_history
from .degrees import DEFAULT_GRID, build_sigma_table
from .diffuse import SpreadConfig, experiment_sweep, format_sweep
from .extract import Clamp, ExtractionOptions, extract_config
from .generator import PHASES, bench_config, generate
from .measures import correlation_report
from .sampling import RngStream

log = logging.getLogger("mlnbench")

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


def _versions() -> dict:
    return {"mlnbench": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _json_safe(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, np.ndarray):
        return [_json_safe(v) for v in x.tolist()]
    if isinstance(x, list):
        return [_json_safe(v) for v in x]
    return x


def _config_dict(cfg) -> dict:
    return {
        "n": cfg.n, "ell": cfg.ell, "d": cfg.d, "t": cfg.t, "eps": cfg.eps,
        "max_sampling_iters": cfg.max_sampling_iters, "seed": cfg.seed,
        "layers": [vars(p).copy() for p in cfg.layers],
        "R": _json_safe(np.asarray(cfg.R)),
        "injected_degrees": [s is not None for s in cfg.degree_sequences],
        "injected_community_sizes": [s is not None for s in cfg.community_sizes],
    }


def _write_manifest(path: Path, subcommand: str, payload: dict) -> None:
    doc = {"subcommand": subcommand, "versions": _versions(), **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    try:
        cfg = read_config(args.config)
    except (ConfigError, NetworkFormatError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None:
        cfg.seed = args.seed
    violations = validate_config(cfg)
    if violations:
        for v in violations:
            print(f"invalid configuration: {v}", file=sys.stderr)
        return EXIT_INVALID
    t0 = time.perf_counter()
    result = generate(cfg, skip_phase6=args.skip_phase6)
    total = time.perf_counter() - t0
    out = Path(args.out)
    write_network(result.network, out, notes=result.notes())
    if result.match is not None and args.history:
        write_history(result.match.history, out / "history.tsv")
    if args.dump_reference:
        ref = build_reference_layer(cfg.n, cfg.d, RngStream(cfg.seed, "generate").child("reference"))
        with open(out / "reference.tsv", "w") as fh:
            for a, row in enumerate(ref.points.tolist(), start=1):
                fh.write(f"{a}\t" + "\t".join(repr(x) for x in row) + "\n")
    _write_manifest(out / "manifest.json", "generate", {
        "config": _config_dict(cfg), "config_text": Path(args.config).read_text(),
        "config_path": str(Path(args.config).resolve()), "seed": cfg.seed, "skip_phase6": args.skip_phase6,
        "timings": {**result.timings, "total": total},
    })
    log.info("wrote %d layers to %s in %.2fs", cfg.ell, out, total)
    return EXIT_OK


def cmd_measure(args) -> int:
    net = read_network_dir(args.net, n=args.n)
    report = correlation_report(net)
    for title, mat in (("degree_tau", report.degree_tau),
                       ("partition_ami", report.partition_ami),
                       ("edge_corr", report.edge_corr)):
        print(f"[{title}]")
        print("\n".join(format_matrix(mat)))
    return EXIT_OK


def _read_any_network(args):
    """Directory of ``layer_<i>.tsv``: integer ids, or arbitrary labels with ``--labelled``."""
    directory = Path(args.net)
    if not args.labelled:
        return read_network_dir(directory), None
    files = sorted(directory.glob("layer_*.tsv"), key=lambda p: int(p.stem.split("_")[1]))
    if not files:
        raise FileNotFoundError(f"no layer_<i>.tsv files in {directory}")
    return read_labelled_network(files)


def cmd_extract(args) -> int:
    net, labels = _read_any_network(args)
    partitions = None
    if args.partitions:
        ground = read_network_dir(args.partitions, n=net.n)
        if not ground.has_partitions():
            print("no communities_<i>.tsv files in the partition directory", file=sys.stderr)
            return EXIT_ERROR
        partitions = [layer.partition for layer in ground.layers]
    clamp = Clamp() if args.clamp else None
    res = extract_config(net, ExtractionOptions(partitions, args.resolution, clamp, args.seed))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    files = None
    if args.export_sequences:
        files = {"degree_files": [], "comsize_files": []}
        for i, (deg, sizes) in enumerate(zip(res.degree_sequences, res.community_sizes), start=1):
            dname, cname = f"degrees_{i}.tsv", f"comsizes_{i}.tsv"
            write_degree_file(out.parent / dname, deg)
            write_size_file(out.parent / cname, sizes)
            files["degree_files"].append(dname)
            files["comsize_files"].append(cname)
    write_config(res.config, out, files)
    with open(out.parent / "actors.tsv", "w") as fh:
        for new, old in enumerate(res.order.tolist(), start=1):
            original = labels[old] if labels is not None else str(old + 1)
            fh.write(f"{new}\t{original}\n")
    for note in res.notes:
        log.warning("%s", note)
    return EXIT_OK


def _split_list(text: str, conv):
    return [conv(x) for x in text.split(",") if x.strip()]


def cmd_diffuse(args) -> int:
    nets = {}
    for entry in args.net:
        name, _, path = entry.rpartition("=")
        nets[name or Path(path).name] = [read_network_dir(path)]
    seeder = args.seeder
    if seeder not in ("nsd", "dcd"):
        seeder = [int(x) - 1 for x in Path(seeder).read_text().split()]
    configs = [SpreadConfig(pi, proto, budget, seeder, args.max_steps)
               for proto in _split_list(args.protocol, str.upper)
               for pi in _split_list(args.pi, float)
               for budget in _split_list(args.budget, str)]
    rows = experiment_sweep(configs, nets, args.reps, args.baseline, args.seed)
    sys.stdout.write(format_sweep(rows))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    grid = DEFAULT_GRID if args.points is None else np.concatenate(
        ([0.0], np.geomspace(1e-3, args.sigma_max, args.points - 1)))
    table = build_sigma_table(args.n, grid, args.reps, RngStream(args.seed, "sigma-table"))
    table.save(args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    modes = {"on": [False], "off": [True], "both": [True, False]}[args.phase6]
    print("n\tell\tphase6\tmean_s\tstd_s\t" + "\t".join(f"{p}_pct" for p in PHASES))
    for n in args.sizes:
        for ell in args.layers:
            for skip in modes:
                walls, shares = [], []
                for rep in range(args.reps):
                    cfg = bench_config(n, ell, seed=args.seed + rep)
                    t0 = time.perf_counter()
                    res = generate(cfg, skip_phase6=skip)
                    walls.append(time.perf_counter() - t0)
                    tot = sum(res.timings.values()) or 1.0
                    shares.append([100.0 * res.timings[p] / tot for p in PHASES])
                w = np.asarray(walls)
                pct = np.mean(shares, axis=0)
                std = w.std(ddof=1) if len(w) > 1 else 0.0
                print(f"{n}\t{ell}\t{'off' if skip else 'on'}\t{w.mean():.3f}\t{std:.3f}\t"
                      + "\t".join(f"{x:.1f}" for x in pct), flush=True)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mlnbench", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a multilayer network from a config file")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--skip-phase6", action="store_true")
    g.add_argument("--seed", type=int)
    g.add_argument("--history", action="store_true", help="write history.tsv of L2 distances")
    g.add_argument("--dump-reference", action="store_true", help="write reference.tsv")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("measure", help="print the three correlation matrices")
    m.add_argument("--net", required=True)
    m.add_argument("--n", type=int)
    m.set_defaults(func=cmd_measure)

    e = sub.add_parser("extract", help="fit a generator config to a network")
    e.add_argument("--net", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--partitions", help="directory with communities_<i>.tsv")
    e.add_argument("--labelled", action="store_true", help="edge files use arbitrary labels")
    e.add_argument("--resolution", type=float, default=1.0)
    e.add_argument("--clamp", action="store_true", help="gamma <= 3, delta >= 10, s >= 50")
    e.add_argument("--export-sequences", action="store_true")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_extract)

    d = sub.add_parser("diffuse", help="multilayer independent cascade gain table")
    d.add_argument("--net", required=True, action="append",
                   help="network directory, optionally NAME=DIR; repeat for several series")
    d.add_argument("--pi", required=True, help="comma-separated activation probabilities")
    d.add_argument("--protocol", default="OR", help="AND, OR or both comma-separated")
    d.add_argument("--budget", default="1%", help="comma-separated counts or percentages")
    d.add_argument("--seeder", default="nsd", help="nsd, dcd or a file of 1-based actor ids")
    d.add_argument("--reps", type=int, default=30)
    d.add_argument("--max-steps", type=int)
    d.add_argument("--baseline")
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_diffuse)

    c = sub.add_parser("calibrate-sigma", help="rebuild the sigma/tau calibration table")
    c.add_argument("--n", type=int, default=1_000_000)
    c.add_argument("--out", required=True)
    c.add_argument("--reps", type=int, default=1)
    c.add_argument("--points", type=int)
    c.add_argument("--sigma-max", type=float, default=20.0)
    c.add_argument("--seed", type=int, default=2024)
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("bench", help="time generation over sizes and layer counts")
    b.add_argument("--sizes", type=int, nargs="+", default=[1024])
    b.add_argument("--layers", type=int, nargs="+", default=[2])
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--phase6", choices=("on", "off", "both"), default="both")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GenerationInfeasible as exc:
        print(f"generation infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
