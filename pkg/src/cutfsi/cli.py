"""Command line interface: run, convergence, verify.

``run`` advances one simulation and writes a step log plus VTU snapshots,
``convergence`` performs a spatial or temporal refinement study, and
``verify`` executes the built-in stability and geometry checks.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, reporting
from .config import ConfigError, SimulationConfig, format_config, parse_config
from .discretization import Discretization
from .mesh import verify_path_assumption
from .quadrature import interface_rule
from .stepper import TimeStepper

# Desk-scale guardrail: finer levels than this need an explicit override.
MIN_H = 0.0078125
MAX_DOFS = 3_000_000


def _load_config(args) -> SimulationConfig:
    overrides = {}
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    cfg = parse_config(getattr(args, "config", None), overrides=overrides)
    cfg.validate()
    return cfg


def _check_scale(cfg: SimulationConfig, allow_large: bool) -> None:
    h = 2.0 / cfg.n
    est_dofs = 2 * (2 * cfg.n + 1) ** 2 + (cfg.n + 1) ** 2 \
        + 4 * (cfg.m_s * cfg.n + 1) ** 2
    if not allow_large and (h < MIN_H or est_dofs > MAX_DOFS):
        raise SystemExit(
            f"refusing n={cfg.n} (h={h:g}, ~{est_dofs} dofs); "
            "pass --allow-large to override")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    _check_scale(cfg, args.allow_large)
    outdir = Path(args.output_dir)
    disc = Discretization(cfg)
    stepper = TimeStepper(disc)
    ana = analysis.Analyzer(disc, stepper.forms)
    dump_every = args.dump_every

    def observer(state):
        if dump_every and state.index % dump_every == 0:
            reporting.write_snapshot(outdir, disc, state, f"{state.index:05d}")

    energies = []
    def record_energy(state):
        energies.append(ana.energy(state))
        observer(state)

    records, states = stepper.run(store_all=False, observer=record_energy)
    for rec, e in zip(records, energies):
        rec.energy = e
    reporting.write_step_log(outdir / "steps.csv", cfg, records)
    reporting.write_snapshot(outdir, disc, states[-1], "final")
    final = states[-1]
    e = ana.energy(final)
    print(f"ran {cfg.n_steps} steps to T={cfg.T:g} on n={cfg.n} "
          f"(h={disc.h:g}, {disc.layout.total} dofs)")
    print(f"final solve residual {final.solve_residual:.3e}, "
          f"constraint residual {final.constraint_residual:.3e}")
    print(f"final energies: E_T^2={e['E_T2']:.6e}  E_g^2={e['E_g2']:.6e}  "
          f"|||.|||^2={e['triple2']:.6e}")
    print(f"wrote {outdir / 'steps.csv'} and VTU snapshots")
    return 0


def cmd_convergence(args) -> int:
    cfg = _load_config(args).replace(m_s=args.solid_order)
    if args.mode == "space":
        n_levels = [cfg.n * 2 ** i for i in range(args.levels)]
        n_ref = args.ref if args.ref else 2 * n_levels[-1]
        _check_scale(cfg.replace(n=n_ref), args.allow_large)
        report = analysis.spatial_study(cfg, n_levels, n_ref)
    else:
        k_levels = [cfg.k / 2 ** i for i in range(args.levels)]
        k_ref = args.ref if args.ref else k_levels[-1] / 2
        _check_scale(cfg, args.allow_large)
        report = analysis.temporal_study(cfg, k_levels, float(k_ref))
    print(reporting.format_convergence_table(report))
    out = Path(args.output_dir) / f"convergence_{args.mode}_ms{cfg.m_s}.csv"
    reporting.write_convergence_csv(out, cfg, report)
    print(f"wrote {out}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    failures = 0

    def check(label, ok, detail=""):
        nonlocal failures
        mark = "ok  " if ok else "FAIL"
        print(f"[{mark}] {label}" + (f": {detail}" if detail else ""))
        if not ok:
            failures += 1

    # geometry: cut quadrature reproduces the exact area and arc length
    exact_area = np.pi * cfg.radius_squared
    exact_len = 2.0 * np.pi * np.sqrt(cfg.radius_squared)
    discs = {n: Discretization(cfg.replace(n=n)) for n in (8, 16, 32)}
    for n in (8, 16, 32):
        disc = discs[n]
        _, w, _ = analysis.domain_points(disc, "s")
        area = float(np.sum(w))
        length = sum(interface_rule(disc.mesh, disc.topo, int(c)).total
                     for c in disc.topo.cut_cells)
        check(f"n={n} solid area", abs(area - exact_area) < 1e-8,
              f"error {abs(area - exact_area):.2e}")
        check(f"n={n} interface length", abs(length - exact_len) < 1e-10,
              f"error {abs(length - exact_len):.2e}")
        for side in ("f", "s"):
            plen, _ = verify_path_assumption(disc.topo, side)
            check(f"n={n} ghost path assumption ({side})", plen < np.inf,
                  f"max path length {plen}")

    # ghost-extension estimate: ratios stay bounded under refinement
    for side, order in (("f", 2), ("f", 1), ("s", cfg.m_s)):
        for l in (0, 1):
            ratios = [analysis.ghost_extension_ratios(
                discs[n], side, order, l, cfg.w_max, seed=args.seed)
                for n in (8, 16, 32)]
            spread = max(ratios) / min(ratios)
            check(f"ghost extension side={side} order={order} l={l}",
                  spread <= 2.0,
                  "ratios " + ", ".join(f"{r:.3f}" for r in ratios))

    # necessity: without the jump terms no h-uniform constant exists
    ratios = [analysis.ghost_extension_ratios(
        discs[n], "f", 2, 1, cfg.w_max, gamma_on=False, sampler="cell",
        seed=args.seed) for n in (8, 16, 32)]
    check("ghost necessity (gamma=0, fluid, l=1)",
          max(ratios) / min(ratios) >= 5.0,
          "ratios " + ", ".join(f"{r:.1f}" for r in ratios))

    # energy decay from random data with zero inflow
    disc = Discretization(cfg.replace(n=8, k=0.5))
    for seed in range(args.seed, args.seed + 5):
        ok, hist, viol = analysis.verify_energy_decay(disc, seed=seed)
        check(f"energy decay seed={seed}", ok,
              f"Q drops {hist[0]:.3e} -> {hist[-1]:.3e}"
              + ("" if ok else f", violated at step {viol}"))

    print(f"{failures} failures" if failures else "all checks passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutfsi",
        description="Unfitted finite element solver for linear "
                    "fluid-structure interaction")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="configuration file (key = value lines)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration entry")
        p.add_argument("--output-dir", default="output",
                       help="directory for CSV/VTU output")
        p.add_argument("--allow-large", action="store_true",
                       help="permit resolutions beyond the desk-scale guardrail")

    p_run = sub.add_parser("run", help="advance one simulation to T")
    common(p_run)
    p_run.add_argument("--dump-every", type=int, default=0, metavar="N",
                       help="write VTU snapshots every N steps")
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("convergence", help="refinement study")
    common(p_conv)
    p_conv.add_argument("--mode", choices=("space", "time"), required=True)
    p_conv.add_argument("--levels", type=int, default=4)
    p_conv.add_argument("--ref", type=float, default=0.0,
                        help="reference resolution: n (space) or k (time)")
    p_conv.add_argument("--solid-order", type=int, choices=(1, 2), default=1)
    p_conv.set_defaults(func=cmd_convergence)

    p_ver = sub.add_parser("verify", help="stability and geometry checks")
    common(p_ver)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "convergence" and args.mode == "space" and args.ref:
        args.ref = int(args.ref)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
