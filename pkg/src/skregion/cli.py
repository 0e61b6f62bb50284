"""Command-line front end: ``skregion {region,outer,corollary,simulate,check}``.

Human summaries go to stdout.  Machine payloads (CSV/JSON) are written to
``--out`` and are byte-identical across reruns with the same inputs and
seed, whatever ``--threads`` is.  Each command also writes an
``<command>_record.json`` holding the config, timing and payload names.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .codec import SimulationReport, build_codebook, run_trials
from .dmms import AuxChannelSet, load_pmf
from .errors import BudgetExceeded, DegenerateRates, PmfError, PmfFormatError
from .region import (
    RegionFrontier,
    SearchConfig,
    corollary_capacity,
    outer_bound,
    search_inner_region,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_PMF = 3
EXIT_NO_CHAIN = 4
EXIT_VIOLATION = 5
CHECK_TOL = 1e-9


def _tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


@dataclass
class ExperimentRecord:
    command: str
    config: dict
    seed: int
    tool_version: str
    timestamp: str
    duration_s: float
    payload: dict  # role -> file name, relative to the output directory

    def write(self, out: Path) -> Path:
        path = out / f"{self.command}_record.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def _write(out: Path, name: str, text: str) -> str:
    (out / name).write_text(text)
    return name


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _search_cfg(args) -> SearchConfig:
    return SearchConfig(card_q=args.card_q, n_random=args.n_random, sweeps=args.sweeps,
                        seed=args.seed)


def _fmt(t) -> str:
    return "(" + ", ".join(f"{v:.6f}" for v in t) + ")"


# ---------------------------------------------------------------------------
# commands

def cmd_region(args, out: Path) -> tuple[int, dict]:
    pmf = load_pmf(args.pmf)
    front = search_inner_region(pmf, _search_cfg(args), threads=args.threads)
    files = {
        "csv": _write(out, "region_frontier.csv", front.to_csv()),
        "provenance": _write(out, "region_provenance.json", front.provenance_json() + "\n"),
    }
    m = front.max_rates()
    print(f"corners: {len(front.points)}")
    print(f"max r0 = {m.r0:.6f}  max r1 = {m.r1:.6f}  max r2 = {m.r2:.6f}")
    return EXIT_OK, files


def cmd_outer(args, out: Path) -> tuple[int, dict]:
    box = outer_bound(load_pmf(args.pmf))
    text = "b0,b1,b2\n" + ",".join(repr(float(v)) for v in box) + "\n"
    print(f"outer box (R0, R1, R2) <= {_fmt(box)}")
    return EXIT_OK, {"csv": _write(out, "outer_box.csv", text)}


def cmd_corollary(args, out: Path) -> tuple[int, dict]:
    pmf = load_pmf(args.pmf)
    rep = corollary_capacity(pmf, tol=args.tol, cfg=_search_cfg(args), threads=args.threads)
    if rep is None:
        print("no special Markov chain detected")
        return EXIT_NO_CHAIN, {}
    print(f"{rep.case}: {'-'.join(rep.ordering)}")
    print(rep.description)
    if rep.frontier is not None:
        print(f"corners: {len(rep.frontier.points)}, max {_fmt(rep.frontier.max_rates())}")
    return EXIT_OK, {"json": _write(out, "corollary.json", _dump(rep.to_dict()))}


def _resolve_aux(choice, x3_size: int) -> AuxChannelSet:
    if choice == "identity-u0":
        return AuxChannelSet.identity_u0(x3_size)
    if choice == "trivial":
        return AuxChannelSet.trivial(x3_size)
    if isinstance(choice, dict):
        return AuxChannelSet.from_dict(choice)
    raise PmfFormatError(f"unknown aux setting {choice!r}")


def load_sim_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PmfFormatError(f"cannot read simulation config {path}: {exc}") from exc
    required = {"pmf", "n"}
    if not isinstance(cfg, dict) or not required <= cfg.keys():
        raise PmfFormatError(f"{path}: config needs keys {sorted(required)}")
    ns = cfg["n"] if isinstance(cfg["n"], list) else [cfg["n"]]
    full = {
        "pmf": cfg["pmf"],
        "aux": cfg.get("aux", "identity-u0"),
        "n": [int(v) for v in ns],
        "eps1": float(cfg.get("eps1", 0.05)),
        "typ_eps": float(cfg.get("typ_eps", 0.05)),
        "backoff": float(cfg.get("backoff", 0.25)),
        "trials": int(cfg.get("trials", 100)),
        "seed": int(cfg.get("seed", 0)),
    }
    return full


def simulate(cfg: dict, base_dir: Path, seed: int, threads: int) -> list[SimulationReport]:
    pmf_path = Path(cfg["pmf"])
    if not pmf_path.is_absolute():
        pmf_path = base_dir / pmf_path
    pmf = load_pmf(pmf_path)
    aux = _resolve_aux(cfg["aux"], pmf.alphabet_sizes[2])
    reports = []
    for n in cfg["n"]:
        cb = build_codebook(pmf, aux, n, cfg["eps1"], seed, backoff=cfg["backoff"])
        reports.append(run_trials(pmf, aux, n, cfg["eps1"], cfg["typ_eps"], cfg["trials"], seed,
                                  backoff=cfg["backoff"], threads=threads, codebook=cb))
    return reports


def cmd_simulate(args, out: Path) -> tuple[int, dict]:
    cfg = load_sim_config(args.config)
    # an explicit --seed overrides the config seed
    seed = cfg["seed"] if args.seed_given is None else args.seed_given
    cfg["seed"] = seed
    reports = simulate(cfg, Path(args.config).resolve().parent, seed, args.threads)
    csv = "\n".join([SimulationReport.CSV_HEADER] + [r.csv_row() for r in reports]) + "\n"
    doc = {"config": cfg, "reports": [r.to_dict() for r in reports]}
    files = {
        "json": _write(out, "simulate_report.json", _dump(doc)),
        "csv": _write(out, "simulate_report.csv", csv),
    }
    print(f"{'n':>4} {'err_common':>10} {'err_pk1':>8} {'err_pk2':>8} {'leak_eve':>9} "
          f"{'leak_21':>8} {'enc_fail':>8}")
    for r in reports:
        print(f"{r.n:>4} {r.err_common:>10.4f} {r.err_pk1:>8.4f} {r.err_pk2:>8.4f} "
              f"{r.leak_eve_per_symbol:>9.4f} {r.leak_cross_21:>8.4f} {r.encoder_failure_rate:>8.4f}")
    return EXIT_OK, files


def cmd_check(args, out: Path) -> tuple[int, dict]:
    pmf = load_pmf(args.pmf)
    box = np.array(outer_bound(pmf))
    if args.frontier_csv:
        try:
            front = RegionFrontier.from_csv(Path(args.frontier_csv).read_text())
        except (OSError, ValueError) as exc:
            raise PmfFormatError(f"cannot read frontier {args.frontier_csv}: {exc}") from exc
    else:
        front = search_inner_region(pmf, _search_cfg(args), threads=args.threads)
    bad = [list(p) for p in front.points if np.any(np.array(p) > box + CHECK_TOL)]
    doc = {"outer_box": box.tolist(), "corners": len(front.points), "violations": bad,
           "contained": not bad}
    files = {"json": _write(out, "check.json", _dump(doc))}
    if bad:
        print(f"VIOLATION: corner {_fmt(bad[0])} exceeds outer box {_fmt(box)}")
        return EXIT_VIOLATION, files
    print(f"ok: {len(front.points)} corners inside outer box {_fmt(box)}")
    return EXIT_OK, files


# ---------------------------------------------------------------------------
# parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--out", default="out", help="output directory (default ./out)")
    common.add_argument("--tol", type=float, default=1e-6, help="Markov-chain test tolerance")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                        help="worker threads; never changes results")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--card-q", type=_positive_int, default=1, help="|Q| for the search")
    search.add_argument("--n-random", type=int, default=512, help="random auxiliary tuples")
    search.add_argument("--sweeps", type=int, default=2, help="coordinate-ascent sweeps")

    p = argparse.ArgumentParser(prog="skregion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("region", "trace the inner-bound frontier"),
                           ("outer", "print the outer box"),
                           ("corollary", "detect a special Markov chain and report its region")):
        sp = sub.add_parser(name, parents=[common] + ([search] if name != "outer" else []),
                            help=helptext)
        sp.add_argument("pmf", help="PMF JSON file")
    sp = sub.add_parser("simulate", parents=[common], help="run a codec sweep from a config")
    sp.add_argument("config", help="simulation config JSON")
    sp = sub.add_parser("check", parents=[common, search], help="verify inner within outer")
    sp.add_argument("pmf", help="PMF JSON file")
    sp.add_argument("--frontier-csv", help=argparse.SUPPRESS)
    return p


COMMANDS = {"region": cmd_region, "outer": cmd_outer, "corollary": cmd_corollary,
            "simulate": cmd_simulate, "check": cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.seed_given = args.seed
    if args.seed is None:
        args.seed = 0
    out = Path(args.out)
    started = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    try:
        out.mkdir(parents=True, exist_ok=True)
        code, files = COMMANDS[args.command](args, out)
    except PmfFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PmfError as exc:
        print(f"invalid PMF: {exc}", file=sys.stderr)
        return EXIT_BAD_PMF
    except (BudgetExceeded, DegenerateRates) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    config = {k: v for k, v in vars(args).items()
              if k not in ("out", "threads", "seed_given", "command")}
    ExperimentRecord(args.command, config, args.seed, _tool_version(), stamp,
                     time.perf_counter() - started, files).write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
