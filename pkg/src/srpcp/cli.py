"""Command-line surface: gen, solve, bench, video.

Exit codes for ``solve``: 0 on tolerance, 2 on max-iter, 3 on timeout,
4 on overfit; 1 for usage or I/O errors. ``SRPCP_THREADS`` caps the number
of parallel bench workers.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import data, solver

EXIT_CODES = {
    solver.TerminationReason.TOLERANCE: 0,
    solver.TerminationReason.MAX_ITER: 2,
    solver.TerminationReason.TIMEOUT: 3,
    solver.TerminationReason.OVERFIT: 4,
}

BENCH_HEADER = "n,r,s,sigma,seed,mode,wall_ms,iters,eta_S,eta_L,obj,rank"

_BENCH_WALL_CAP = 5 * 3600.0  # per-solve default, overridable


class VideoResult(NamedTuple):
    stack: data.FrameStack
    D: np.ndarray
    L: np.ndarray
    S: np.ndarray
    Z: np.ndarray
    rank: int
    eta: float


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, data.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="srpcp",
        description="Low-rank plus sparse decomposition with a square-root data-fit term.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance on disk")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--s", type=int, required=True, help="sparse support size")
    g.add_argument("--sigma", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance from a matrix file")
    s.add_argument("--input", type=Path, required=True, help=".srpm or .csv matrix")
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--mu", type=float, default=None)
    s.add_argument("--eps", type=float, default=1e-6)
    s.add_argument("--mode", choices=("plain", "acc"), default="plain")
    s.add_argument("--max-iter", type=int, default=5000)
    s.add_argument("--k0", type=int, default=10, help="initial rank guess (acc mode)")
    s.add_argument("--out-prefix", type=str, required=True)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a synthetic benchmark grid to CSV")
    b.add_argument("--n", type=_int_list, required=True, help="comma list, e.g. 100,200")
    b.add_argument("--r", type=_int_list, required=True)
    b.add_argument(
        "--s",
        type=_float_list,
        required=True,
        help="comma list; values < 1 are fractions of n^2, else absolute counts",
    )
    b.add_argument("--sigma", type=_float_list, required=True)
    b.add_argument("--seeds", type=_int_list, default=[0], help="comma list of seeds")
    b.add_argument("--eps", type=float, default=1e-6)
    b.add_argument("--modes", type=_mode_list, default=["plain"], help="comma list: plain,acc")
    b.add_argument("--max-wall", type=float, default=_BENCH_WALL_CAP, help="seconds per solve")
    b.add_argument("--out", type=Path, required=True)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("video", help="decompose a directory of PGM frames")
    v.add_argument("--frames-dir", type=Path, required=True)
    v.add_argument("--eps", type=float, default=1e-5)
    v.add_argument("--out-dir", type=Path, required=True)
    v.add_argument("--stretch", action="store_true", help="contrast-stretch outputs")
    v.set_defaults(func=cmd_video)
    return parser


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok]


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok]


def _mode_list(text):
    modes = [tok for tok in text.split(",") if tok]
    for m in modes:
        if m not in ("plain", "acc"):
            raise argparse.ArgumentTypeError(f"unknown mode {m!r}")
    return modes


def cmd_gen(args) -> int:
    inst = data.gen_synthetic(args.n, args.r, args.s, args.sigma, args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    for name, mat in (("D", inst.D), ("L0", inst.L0), ("S0", inst.S0), ("Z0", inst.Z0)):
        data.save_matrix(out / f"{name}.srpm", mat)
    manifest = {
        "n": inst.n,
        "r": inst.r,
        "s": inst.s,
        "sigma": inst.sigma,
        "seed": inst.seed,
        "files": {k: f"{k}.srpm" for k in ("D", "L0", "S0", "Z0")},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {out}/[D,L0,S0,Z0].srpm and manifest.json")
    return 0


def _solver_config(args) -> solver.SolverConfig:
    return solver.SolverConfig(
        tolerance=args.eps,
        max_iterations=args.max_iter,
        mode="accelerated" if args.mode == "acc" else "plain",
        initial_rank=args.k0,
    )


def cmd_solve(args) -> int:
    if not args.input.exists():
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return 1
    D = data.load_matrix(args.input)
    problem = _make_problem(D, args.lam, args.mu)
    config = _solver_config(args)
    run = solver.acc_alt_min if args.mode == "acc" else solver.alt_min
    result = run(problem, config)

    prefix = args.out_prefix
    data.save_matrix(Path(prefix + "L_hat.srpm"), result.L_hat)
    data.save_matrix(Path(prefix + "S_hat.srpm"), result.S_hat)
    _write_history_csv(Path(prefix + "history.csv"), result, config)
    print(
        f"iters={result.iterations} eta={result.final_residual:.3e} "
        f"obj={result.objective_history[-1]:.6f} rank={result.rank_history[-1]} "
        f"reason={result.termination_reason.value}"
    )
    return EXIT_CODES[result.termination_reason]


def _make_problem(D, lam, mu) -> solver.Problem:
    base = solver.Problem.with_default_penalties(D)
    return solver.Problem(
        D, lam if lam is not None else base.lam, mu if mu is not None else base.mu
    )


def _write_history_csv(path, result, config):
    period = config.residual_check_period
    lines = ["iter,objective,eta,rank"]
    n_iter = result.iterations
    for i in range(n_iter + 1):
        eta = ""
        if i > 0 and i % period == 0:
            j = i // period - 1
            if j < result.residual_history.size:
                eta = repr(float(result.residual_history[j]))
        if i == n_iter and not eta and result.residual_history.size:
            eta = repr(float(result.residual_history[-1]))
        lines.append(
            f"{i},{float(result.objective_history[i])!r},{eta},{result.rank_history[i]}"
        )
    path.write_text("\n".join(lines) + "\n")


def read_history_csv(path):
    """Load a solve history CSV back into arrays (eta may contain NaN)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "iter,objective,eta,rank":
        raise data.FormatError(f"{path}: not a history CSV")
    rows = []
    for ln in lines[1:]:
        it, obj, eta, rank = ln.split(",")
        rows.append((int(it), float(obj), float(eta) if eta else np.nan, int(rank)))
    return rows


def cmd_bench(args) -> int:
    tasks = []
    for n in args.n:
        for r in args.r:
            for s_spec in args.s:
                s = int(round(s_spec * n * n)) if 0 < s_spec < 1 else int(s_spec)
                for sigma in args.sigma:
                    for seed in args.seeds:
                        for mode in args.modes:
                            tasks.append((n, r, s, sigma, seed, mode))

    workers = max(1, int(os.environ.get("SRPCP_THREADS", "1")))
    workers = min(workers, len(tasks))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda t: _bench_one(t, args.eps, args.max_wall), tasks))

    lines = [BENCH_HEADER]
    lines.extend(_format_bench_row(row) for row in rows)
    lines.extend(_aggregate_rows(rows))
    args.out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _bench_one(task, eps, max_wall):
    n, r, s, sigma, seed, mode = task
    try:
        inst = data.gen_synthetic(n, r, s, sigma, seed)
        problem = solver.Problem.with_default_penalties(inst.D)
        config = solver.SolverConfig(
            tolerance=eps,
            mode="accelerated" if mode == "acc" else "plain",
            max_wall_time=max_wall,
        )
        run = solver.acc_alt_min if mode == "acc" else solver.alt_min
        t0 = time.perf_counter()
        result = run(problem, config)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        eta_L, eta_S = data.recovery_errors(result.L_hat, result.S_hat, inst)
        return {
            "n": n, "r": r, "s": s, "sigma": sigma, "seed": seed, "mode": mode,
            "wall_ms": wall_ms, "iters": result.iterations, "eta_S": eta_S,
            "eta_L": eta_L, "obj": float(result.objective_history[-1]),
            "rank": int(result.rank_history[-1]),
        }
    except Exception as exc:  # partial failures recorded, run continues
        print(f"bench cell {task} failed: {exc}", file=sys.stderr)
        return {
            "n": n, "r": r, "s": s, "sigma": sigma, "seed": seed, "mode": mode,
            "wall_ms": np.nan, "iters": np.nan, "eta_S": np.nan,
            "eta_L": np.nan, "obj": np.nan, "rank": np.nan,
        }


def _format_bench_row(row) -> str:
    return (
        f"{row['n']},{row['r']},{row['s']},{row['sigma']!r},{row['seed']},{row['mode']},"
        f"{row['wall_ms']!r},{row['iters']},{row['eta_S']!r},{row['eta_L']!r},"
        f"{row['obj']!r},{row['rank']}"
    )


def _aggregate_rows(rows):
    """Mean/min/max per (cell, mode), tagged in the seed column."""
    cells = {}
    for row in rows:
        cells.setdefault((row["n"], row["r"], row["s"], row["sigma"], row["mode"]), []).append(row)
    out = []
    for (n, r, s, sigma, mode), group in cells.items():
        for tag, fn in (("mean", np.nanmean), ("min", np.nanmin), ("max", np.nanmax)):
            agg = {
                key: float(fn([g[key] for g in group]))
                for key in ("wall_ms", "iters", "eta_S", "eta_L", "obj", "rank")
            }
            out.append(
                f"{n},{r},{s},{sigma!r},{tag},{mode},{agg['wall_ms']!r},{agg['iters']!r},"
                f"{agg['eta_S']!r},{agg['eta_L']!r},{agg['obj']!r},{agg['rank']!r}"
            )
    return out


def read_bench_csv(path):
    """Load a bench CSV; aggregate rows carry 'mean'/'min'/'max' as seed."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != BENCH_HEADER:
        raise data.FormatError(f"{path}: not a bench CSV")
    rows = []
    for ln in lines[1:]:
        n, r, s, sigma, seed, mode, wall_ms, iters, eta_S, eta_L, obj, rank = ln.split(",")
        rows.append(
            {
                "n": int(n), "r": int(r), "s": int(s), "sigma": float(sigma),
                "seed": int(seed) if seed not in ("mean", "min", "max") else seed,
                "mode": mode, "wall_ms": float(wall_ms), "iters": float(iters),
                "eta_S": float(eta_S), "eta_L": float(eta_L), "obj": float(obj),
                "rank": float(rank),
            }
        )
    return rows


def run_video(frames_dir, eps=1e-5, out_dir=None, stretch=False) -> VideoResult:
    """Video pipeline: stack frames, solve, split into L/S/Z frame triples.

    Writes per-frame background/foreground/noise PGMs when ``out_dir`` is
    given and returns the float matrices (``Z = D - (L + S)`` exactly).
    """
    stack = data.load_frame_stack(frames_dir)
    D = data.stack_to_matrix(stack)
    problem = solver.Problem.with_default_penalties(D)
    result = solver.alt_min(problem, solver.SolverConfig(tolerance=eps))
    L, S = result.L_hat, result.S_hat
    Z = D - (L + S)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        h, w = stack.height, stack.width
        for idx in range(D.shape[1]):
            for name, M in (("background", L), ("foreground", S), ("noise", Z)):
                img = data.unstack_column(M, idx, h, w)
                img = data.contrast_stretch(img) if stretch else img
                data.save_pgm(out_dir / f"{name}_{idx:03d}.pgm", img)
    return VideoResult(
        stack, D, L, S, Z, int(result.rank_history[-1]), result.final_residual
    )


def cmd_video(args) -> int:
    result = run_video(args.frames_dir, args.eps, args.out_dir, args.stretch)
    print(f"frames={result.D.shape[1]} rank={result.rank} eta={result.eta:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
