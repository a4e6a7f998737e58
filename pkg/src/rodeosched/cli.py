"""Command-line surface: schedule design, ensemble statistics, bounds, simulation.

Subcommands
-----------
wam        regenerate the minimax schedule table for a number of cycles
rra        closed-form and Monte Carlo ensemble statistics, separatrix fits,
           and single sampled-schedule traces
super      super-iteration suppression curves and the random-ensemble comparison
bound      monotone envelopes and partial-information suppression bounds
simulate   statevector trajectories cross-checked against the closed forms
verify     cross-module consistency suite and reference-table checks

Common flags: ``--out PATH`` (default stdout), ``--format {csv,json}``,
``--seed N``, ``--config FILE`` (JSON defaults mirroring the flags; explicit
flags win).  Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numeric failure.  Output is deterministic given flags and seed: CSV uses
17-significant-digit decimals and LF line endings.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources

import numpy as np

from . import bounds, core, qsim, rra, superiter, wam
from .core import NumericError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(header: list[str], rows: list[list], out_path: str | None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_text("\n".join(lines) + "\n", out_path)


def _write_json(payload, out_path: str | None) -> None:
    _write_text(json.dumps(payload, indent=2) + "\n", out_path)


def _write_text(text: str, out_path: str | None) -> None:
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)


def _parse_grid(expr: str) -> np.ndarray:
    """Parse 'start:stop:step' or a single number into a grid."""
    parts = expr.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start:stop:step' or a single value, got {expr!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid {expr!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _load_reference_table(path: str | None) -> dict:
    if path is not None:
        with open(path) as fh:
            return json.load(fh)
    ref = resources.files("rodeosched").joinpath("data/wam_reference.json")
    return json.loads(ref.read_text())


# ---------------------------------------------------------------------------
# subcommands


def cmd_wam(args) -> int:
    if not (1 <= args.cycles <= 12):
        raise ValueError("cycles must lie in [1, 12]")
    rows = wam.wam_table(args.cycles, depth=args.depth)
    if args.format == "json":
        _write_json({"rows": rows}, args.out)
    else:
        header = ["n", "Q", "total_time"] + [f"t{i}" for i in range(1, args.cycles + 1)]
        table = []
        for row in rows:
            padded = list(row["times"]) + [None] * (args.cycles - len(row["times"]))
            table.append([row["n"], row["max_suppression"], row["total_time"], *padded])
        _write_csv(header, table, args.out)
    return EXIT_OK


def cmd_rra(args) -> int:
    if args.separatrix:
        fits = {name: rra.separatrix_fit_for(name) for name in ("geometric", "arithmetic", "rms")}
        if args.format == "json":
            payload = {name: {"alpha": f.alpha, "beta": f.beta} for name, f in fits.items()}
            _write_json(payload, args.out)
        else:
            rows = [[name, f.alpha, f.beta] for name, f in fits.items()]
            _write_csv(["statistic", "alpha", "beta"], rows, args.out)
        return EXIT_OK

    zetas = _parse_grid(args.zeta)
    n_set = [int(s) for s in args.n.split(",")]
    if any(n < 1 for n in n_set):
        raise ValueError("iteration counts must be positive")

    if args.single_run:
        n = n_set[0]
        sched = rra.sample_schedule(n, rra.HalfNormalTimeDistribution(args.mean_time), args.seed)
        rows = [[z, core.schedule_suppression(sched, z)] for z in zetas]
        if args.format == "json":
            _write_json(
                {"times": list(sched.times), "points": [{"zeta": z, "s": s} for z, s in rows]},
                args.out,
            )
        else:
            _write_csv(["zeta", "s"], rows, args.out)
        return EXIT_OK

    header = ["zeta", "n", "mean", "geomean", "rms", "sigma_over_mean", "median", "stderr_mean"]
    rows = []
    for n in n_set:
        for z in zetas:
            z = float(z)
            if args.trials > 0:
                mc = rra.monte_carlo_statistics(z, n, args.trials, seed=args.seed)
                rows.append([z, n, mc.stats.arithmetic_mean, mc.stats.geometric_mean,
                             mc.stats.rms, mc.stats.sigma_over_mean, mc.median, mc.stderr_mean])
            else:
                mean = rra.rra_mean_per_iteration(z, n)
                geo = rra.rra_geometric_mean(z, n) if z > 0 else 1.0
                rms = rra.rra_rms(z, n)
                som = rra.rra_sigma_over_mean(z, n) if z > 0 else 0.0
                rows.append([z, n, mean, geo, rms, som, None, None])
    if args.format == "json":
        payload = [dict(zip(header, row)) for row in rows]
        _write_json(payload, args.out)
    else:
        _write_csv(header, rows, args.out)
    return EXIT_OK


def cmd_super(args) -> int:
    xs = _parse_grid(args.x)
    header = ["x", "zeta_sup", "suppression", "truncated", f"rra_mean_n{args.rra_n}", "advantage"]
    rows = []
    for x in xs:
        x = float(x)
        zeta = x * args.base
        s = superiter.super_suppression(zeta)
        s_trunc = superiter.truncated_super_suppression(zeta, args.depth)
        mean = rra.rra_mean_total(x * args.base, args.rra_n)
        rows.append([x, zeta, s, s_trunc, mean, mean / s if s > 0 else None])
    if args.format == "json":
        payload = [dict(zip(header, row)) for row in rows]
        _write_json(payload, args.out)
    else:
        _write_csv(header, rows, args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    rows = wam.wam_table(args.cycles, depth=args.depth)
    times = rows[-1]["times"]
    profile = superiter.ideal_profile(times)
    envelope = bounds.monotone_envelope(profile, 1.0, args.x_max)
    q = envelope.evaluate(1.0)

    if args.f is not None or args.x0 is not None:
        if args.f is None or args.x0 is None:
            raise ValueError("--f and --x0 must be given together")
        info = bounds.PartialSpectralInfo(f=args.f, x0=args.x0)
        value = bounds.partial_info_bound(envelope, info)
        payload = {
            "f": info.f,
            "x0": info.x0,
            "bound": value,
            "Q": q,
            "schedule_id": f"wam-{args.cycles}",
        }
        _write_json(payload, args.out)
        return EXIT_OK

    # envelope export: decimate to a manageable row count but keep every
    # plateau edge so the flat ledges survive exactly
    xs = envelope.xs
    vs = envelope.values
    stride = max(1, len(xs) // args.max_rows)
    keep = np.zeros(len(xs), dtype=bool)
    keep[::stride] = True
    keep[0] = keep[-1] = True
    flat_prev = np.concatenate([[False], vs[1:] == vs[:-1]])
    flat_next = np.concatenate([vs[:-1] == vs[1:], [False]])
    keep[flat_prev != flat_next] = True
    out_rows = [[x, v] for x, v in zip(xs[keep], vs[keep])]
    if args.format == "json":
        _write_json({"schedule_id": f"wam-{args.cycles}", "Q": q,
                     "points": [{"x": x, "s_ub": v} for x, v in out_rows]}, args.out)
    else:
        _write_csv(["x", "s_ub"], out_rows, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    with open(args.state) as fh:
        state = qsim.PhysicalState.from_json(fh.read())
    with open(args.schedule) as fh:
        sched = core.Schedule.from_json(fh.read())
    # all-success probability straight from the component weights; unlike the
    # spectrum container this imposes no gap constraint on the energies
    closed = sum(
        float(abs(a) ** 2) * (core.schedule_suppression(sched, x) if x > 0 else 1.0)
        for x, a in zip(state.energies, state.amplitudes)
    )

    successes = 0
    for trial in range(args.trials):
        result = qsim.run_trajectory(state, sched, (args.seed, trial))
        successes += int(result.success)
    rate = successes / args.trials
    stderr = math.sqrt(max(rate * (1.0 - rate), 0.0) / args.trials)
    payload = {
        "trials": args.trials,
        "seed": args.seed,
        "success_rate": rate,
        "stderr": stderr,
        "closed_form": closed,
    }
    if args.format == "json":
        _write_json(payload, args.out)
    else:
        _write_csv(list(payload.keys()), [list(payload.values())], args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _verify_wam(args, report) -> None:
    reference = _load_reference_table(args.golden)
    tol = reference["tolerances"]
    ref_rows = reference["rows"][: args.cycles]
    rows = wam.wam_table(len(ref_rows), depth=args.depth)
    for got, want in zip(rows, ref_rows):
        name = f"wam row {want['n']}"
        ok = True
        details = []
        if len(got["times"]) != len(want["times"]):
            ok, details = False, ["iteration count mismatch"]
        else:
            dt = max(abs(a - b) for a, b in zip(got["times"], want["times"]))
            dtot = abs(got["total_time"] - want["total_time"])
            dq = abs(got["max_suppression"] - want["max_suppression"]) / want["max_suppression"]
            if dt > tol["time_abs"]:
                ok = False
                details.append(f"time deviation {dt:.2e} > {tol['time_abs']:g}")
            if dtot > tol["total_abs"]:
                ok = False
                details.append(f"total deviation {dtot:.2e} > {tol['total_abs']:g}")
            if dq > tol["max_suppression_rel"]:
                ok = False
                details.append(f"bound deviation {dq:.2%} > {tol['max_suppression_rel']:.0%}")
        report(name, ok, "; ".join(details) if details else
               f"Q={got['max_suppression']:.4g} total={got['total_time']:.4f}")


def _verify_qsim(args, report) -> None:
    rng = np.random.default_rng(args.seed)
    worst_prob = worst_amp = worst_density = worst_drift = 0.0
    for _ in range(25):
        dim = int(rng.integers(2, 9))
        energies = (0.0, *np.sort(rng.uniform(1.0, 8.0, dim - 1)))
        amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        state = qsim.PhysicalState.normalized(energies, amps)
        sched = core.Schedule(tuple(rng.uniform(0.1, 2.0, int(rng.integers(1, 7)))))
        spectrum = core.DiscreteSpectrum(
            ground_weight=state.ground_probability,
            excited=tuple((x, float(abs(a) ** 2)) for x, a in
                          zip(state.energies[1:], state.amplitudes[1:])),
        )
        closed = core.success_probability(spectrum, sched)
        current, p_all = state, 1.0
        for tau in sched.times:
            outcome = qsim.apply_iteration(current, tau)
            p_all *= outcome.success_probability
            current = outcome.post_success
        worst_prob = max(worst_prob, abs(p_all - closed))
        first = qsim.apply_iteration(state, float(sched.times[0]))
        norm = math.sqrt(first.success_probability)
        for c in range(1, dim):
            weight = 0.5 * (1.0 + np.exp(-2j * np.pi * energies[c] * sched.times[0]))
            reference = weight * state.amplitudes[c] / norm
            got = first.post_success.amplitudes[c]
            worst_amp = max(worst_amp, abs(abs(got) - abs(reference)))
        check = qsim.verify_reduced_density(state, float(sched.times[0]))
        worst_density = max(worst_density, check.decomposition_residual)
        worst_drift = max(worst_drift, check.ground_probability_drift)
    report("qsim success probability vs closed form", worst_prob <= 1e-12,
           f"worst |diff| = {worst_prob:.2e}")
    report("qsim post-selected amplitudes vs closed form", worst_amp <= 1e-12,
           f"worst |diff| = {worst_amp:.2e}")
    report("qsim reduced-density decomposition", worst_density <= 1e-12,
           f"worst residual = {worst_density:.2e}")
    report("qsim ground-probability conservation", worst_drift <= 1e-12,
           f"worst drift = {worst_drift:.2e}")


def _verify_super(args, report) -> None:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(300):
        zeta = float(rng.uniform(0.0, 1e3))
        depth = int(rng.integers(1, 41))
        direct = 1.0
        for k in range(1, depth + 1):
            direct *= math.cos(math.pi * zeta / 2.0**k) ** 2
        worst = max(worst, abs(superiter.truncated_super_suppression(zeta, depth) - direct))
    report("super truncated ladder vs explicit product", worst <= 1e-10,
           f"worst |diff| = {worst:.2e}")
    peak = wam.find_worst_peak(superiter.ideal_profile([1.0]), 1.0, 50.0)
    ok = abs(peak.value - 4.719e-2) <= 1e-4 and abs(peak.location - 1.43029) <= 1e-3
    report("super single-ladder worst peak", ok,
           f"peak {peak.value:.5g} at x = {peak.location:.6f}")


def _verify_rra(args, report) -> None:
    for zeta, n in ((1.0, 3), (2.0, 6)):
        mc = rra.monte_carlo_statistics(zeta, n, 200_000, seed=args.seed)
        closed = rra.rra_mean_per_iteration(zeta, n)
        z_score = abs(mc.stats.arithmetic_mean - closed) / mc.stderr_mean
        report(f"rra Monte Carlo mean at zeta={zeta} n={n}", z_score <= 3.0,
               f"z = {z_score:.2f}")
    fit = rra.solve_separatrix()
    ok = abs(fit.alpha - 4.271) <= 1e-3 and abs(fit.beta - 2.244) <= 1e-3
    report("rra separatrix constants", ok, f"alpha = {fit.alpha:.4f}, beta = {fit.beta:.4f}")


def cmd_verify(args) -> int:
    sections = {
        "wam": _verify_wam,
        "qsim": _verify_qsim,
        "super": _verify_super,
        "rra": _verify_rra,
    }
    if args.only is not None and args.only not in sections:
        raise ValueError(f"unknown section {args.only!r}; choose from {sorted(sections)}")

    failures = []

    def report(name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        line = f"{status}  {name}"
        if detail:
            line += f"  ({detail})"
        print(line)
        if not ok:
            failures.append(name)

    for name, runner in sections.items():
        if args.only is not None and name != args.only:
            continue
        runner(args, report)

    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(failures)}")
        return EXIT_CHECK_FAILED
    print("all checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rodeosched",
        description="Design, optimize, and verify iteration-time schedules "
                    "for rodeo-algorithm ground-state projection.",
    )
    parser.add_argument("--config", default=None, help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("wam", help="regenerate the minimax schedule table")
    p.add_argument("--cycles", type=int, default=8)
    p.add_argument("--depth", type=int, default=superiter.DEFAULT_DEPTH)
    common(p)
    p.set_defaults(func=cmd_wam)

    p = sub.add_parser("rra", help="random-ensemble statistics and fits")
    p.add_argument("--zeta", default="0:10:0.01", help="grid 'start:stop:step' or one value")
    p.add_argument("--n", default="6", help="comma-separated iteration counts")
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0 = closed form)")
    p.add_argument("--mean-time", type=float, default=1.0)
    p.add_argument("--separatrix", action="store_true", help="emit the three separatrix fits")
    p.add_argument("--single-run", action="store_true",
                   help="emit the suppression trace of one sampled schedule")
    common(p)
    p.set_defaults(func=cmd_rra)

    p = sub.add_parser("super", help="super-iteration suppression curves")
    p.add_argument("--base", type=float, default=1.0, help="super-iteration base time")
    p.add_argument("--depth", type=int, default=superiter.DEFAULT_DEPTH)
    p.add_argument("--x", default="1:20:0.01", help="energy-ratio grid")
    p.add_argument("--rra-n", type=int, default=3,
                   help="iteration count of the random-ensemble comparison column")
    common(p)
    p.set_defaults(func=cmd_super)

    p = sub.add_parser("bound", help="monotone envelope and partial-information bounds")
    p.add_argument("--cycles", type=int, default=3)
    p.add_argument("--depth", type=int, default=superiter.DEFAULT_DEPTH)
    p.add_argument("--x-max", type=float, default=20.0)
    p.add_argument("--f", type=float, default=None, help="excited weight fraction above x0")
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--max-rows", type=int, default=4000, help="envelope CSV row budget")
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="statevector trajectories vs closed forms")
    p.add_argument("--state", required=True, help="physical-state JSON path")
    p.add_argument("--schedule", required=True, help="schedule JSON path")
    p.add_argument("--trials", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="cross-module consistency checks")
    p.add_argument("--only", default=None, help="run one section: wam, qsim, super, rra")
    p.add_argument("--golden", default=None, help="override the packaged reference table")
    p.add_argument("--cycles", type=int, default=8)
    p.add_argument("--depth", type=int, default=superiter.DEFAULT_DEPTH)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pull --config out of argv and fold its values in as parser defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.error("--config requires a path")
    with open(path) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        parser.error("config file must hold a JSON object")
    remaining = argv[:idx] + argv[idx + 2:]
    for action in parser._actions:  # noqa: SLF001
        if not isinstance(action, argparse._SubParsersAction):  # noqa: SLF001
            continue
        for sub_parser in action.choices.values():
            defaults = {
                key.replace("-", "_"): value
                for key, value in config.items()
                if any(f"--{key}" in a.option_strings for a in sub_parser._actions)  # noqa: SLF001
            }
            sub_parser.set_defaults(**defaults)
    return remaining


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE

    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
