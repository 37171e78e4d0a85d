"""Command-line entry point: rates, design, simulate, compare.

All outputs are CSV files with a versioned ``# schema=<name>/v1`` header
line and 17-significant-digit floats, plus binary Wigner grids with JSON
sidecars.  Exit codes: 0 ok, 2 validation failure, 3 runtime/computation
error, 4 inadmissible targets.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import control as ctl
from . import gridio, sim, wigner
from .dispersion import DispersionSpec
from .errors import PhonoctlError
from .rates import rate_grid

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_INADMISSIBLE = 4


class Inadmissible(Exception):
    """Targets failed admissibility or the synthesized control failed L1."""


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path, schema: str, header: list, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# schema={schema}/v1\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def read_csv(path, expected_schema: str | None = None):
    """Read a schema-tagged CSV into (header, float columns)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    idx = 0
    if lines[0].startswith("# schema="):
        tag = lines[0].split("=", 1)[1].strip()
        name, _, version = tag.partition("/")
        if version != "v1":
            raise ValueError(f"{path}: unsupported schema version {tag!r}")
        if expected_schema is not None and name != expected_schema:
            raise ValueError(f"{path}: schema {name!r}, expected {expected_schema!r}")
        idx = 1
    elif expected_schema is not None:
        raise ValueError(f"{path}: missing '# schema={expected_schema}/v1' header")
    header = [h.strip() for h in lines[idx].split(",")]
    data = np.array(
        [[float(v) for v in ln.split(",")] for ln in lines[idx + 1 :] if ln.strip()]
    )
    return header, data


# ---------------------------------------------------------------------------
# subcommands


def cmd_rates(args) -> int:
    spec = DispersionSpec(args.omega0, args.gamma)
    kk = np.linspace(args.kmin, args.kmax, args.grid)
    if args.fhat is not None:
        fh = complex(args.fhat[0], args.fhat[1])
        results = rate_grid(spec, ("feedback", lambda k: fh), kk)
    else:
        results = rate_grid(spec, ("uncontrolled", args.nu), kk)
    rows = []
    for k, res in zip(kk, results):
        if isinstance(res, Exception):
            raise res
        rows.append((k, res.r_a, res.r_t, res.r_r, res.total))
    write_csv(Path(args.out) / "rates.csv", "rates", ["k", "r_a", "r_t", "r_r", "sum"], rows)
    return EXIT_OK


def _load_targets(args) -> ctl.TargetRates:
    if args.targets is not None:
        header, data = read_csv(args.targets)
        cols = {name: data[:, i] for i, name in enumerate(header)}
        for need in ("k", "r_a", "r_t", "r_r"):
            if need not in cols:
                raise ValueError(f"targets file missing column {need!r}")
        return ctl.TargetRates(
            k_grid=cols["k"], r_a=cols["r_a"], r_t=cols["r_t"], r_r=cols["r_r"],
            c1=float(np.min(cols["r_a"])),
        )
    if args.constant is not None:
        r_a, r_t, r_r = args.constant
        kk = np.linspace(args.kmin, args.kmax, args.grid)
        return ctl.TargetRates.constant(kk, r_a, r_t, r_r)
    raise ValueError("provide --targets or --constant")


def cmd_design(args) -> int:
    spec = DispersionSpec(args.omega0, args.gamma)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    targets = _load_targets(args)
    report = ctl.check_targets(targets)

    def dump_admissibility(extra):
        payload = {
            "schema": "admissibility/v1",
            "h2_sum_to_one": report.h2_sum_to_one,
            "h3_positive": report.h3_positive,
            "h4_continuous": report.h4_continuous,
            "h5_sqrt_sum": report.h5_sqrt_sum,
            "details": report.details,
        }
        payload.update(extra)
        with open(out / "admissibility.json", "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")

    if not report.admissible:
        failed = [
            name
            for name, okay in (
                ("H2", report.h2_sum_to_one), ("H3", report.h3_positive),
                ("H4", report.h4_continuous), ("H5", report.h5_sqrt_sum),
            )
            if not okay
        ]
        dump_admissibility({"admissible": False, "failed": failed, "l1_ok": None})
        raise Inadmissible(f"targets failed {','.join(failed)}")

    design = ctl.build_frequency_design(targets, spec)
    horizons = sorted(args.n_sweep)
    n_max = horizons[-1]
    t_grid = ctl.default_time_grid(spec, n_max)
    base = ctl.synthesize_f(design, t_grid)
    completed = ctl.causal_completion(base, design, horizons=tuple(horizons))
    h6 = ctl.check_h6(design, np.linspace(0.1, n_max, 64))

    # per-k design table with Fbar interpolated to omega(k)
    om_k = spec.omega(targets.k_grid)
    fbar_k = np.interp(om_k, design.u_grid, design.Fbar.real) + 1j * np.interp(
        om_k, design.u_grid, design.Fbar.imag
    )
    write_csv(
        out / "design.csv",
        "design",
        ["k", "RE", "IM", "FT_re", "FT_im", "TH_re", "TH_im", "Fbar_re", "Fbar_im"],
        [
            (k, re, im, ft.real, ft.imag, th.real, th.imag, fb.real, fb.imag)
            for k, re, im, ft, th, fb in zip(
                targets.k_grid, design.RE, design.IM, design.FT, design.TH, fbar_k
            )
        ],
    )

    rows = []
    errors = []
    l1_ok = True
    for n_cut in horizons:
        cut = ctl.apply_cutoff(completed, n_cut)
        recovered = ctl.roundtrip_rates(cut, spec, targets.k_grid)
        margin = (targets.k_grid >= 0.05) & (targets.k_grid <= 0.45)
        devs = []
        for keep, k, tgt_t, tgt_r, rec in zip(
            margin, targets.k_grid, targets.r_t, targets.r_r, recovered
        ):
            if isinstance(rec, Exception):
                l1_ok = False
                continue
            if keep:
                devs.append((rec.r_t - tgt_t) ** 2 + (rec.r_r - tgt_r) ** 2)
        err = float(np.sqrt(np.mean(devs))) if devs else float("nan")
        errors.append(err)
        for k, rec in zip(targets.k_grid, recovered):
            if not isinstance(rec, Exception):
                rows.append((k, float(n_cut), rec.r_a, rec.r_t, rec.r_r, err))
    write_csv(
        out / "recovered_rates.csv",
        "recovered_rates",
        ["k", "N", "r_a", "r_t", "r_r", "err_l2_vs_N"],
        rows,
    )

    final = ctl.apply_cutoff(completed, n_max)
    write_csv(
        out / "control.csv",
        "control",
        ["t", "F", "F_N"],
        zip(final.t_grid, final.F, final.F_N),
    )
    dump_admissibility(
        {
            "admissible": True,
            "failed": [],
            "l1_ok": l1_ok,
            "h6_max_discrepancy": h6.max_discrepancy,
            "roundtrip_err_l2": dict(zip(map(str, horizons), errors)),
        }
    )
    if not l1_ok:
        raise Inadmissible("synthesized control violates L1 (Re Fhat >= 0) on the grid")
    return EXIT_OK


def _build_measure(args) -> sim.InitialMeasure:
    if args.measure == "zero":
        return sim.InitialMeasure(kind="zero", support_margin=args.margin)
    if args.measure == "thermal":
        return sim.InitialMeasure(
            kind="thermal", temperature=args.temperature, support_margin=args.margin
        )
    if args.measure == "packet":
        packet = sim.WavePacket(x0=args.x0, sigma_x=args.sigma_x, k0=args.k0)
        return sim.InitialMeasure(
            kind="wave_packet", packet=packet, support_margin=args.margin
        )
    raise ValueError(f"unknown measure {args.measure!r}")


def _build_control(args, spec):
    if args.control == "none":
        return sim.NoControl()
    if args.control == "impulsive":
        return sim.ImpulsivePulse(width=args.pulse_width, eps=args.eps)
    if args.control == "feedback":
        if args.control_csv is None:
            raise ValueError("--control feedback needs --control-csv")
        _, data = read_csv(args.control_csv, expected_schema="control")
        return sim.FeedbackControl(t_grid=data[:, 0], F_N=data[:, 2])
    raise ValueError(f"unknown control {args.control!r}")


def cmd_simulate(args) -> int:
    spec = DispersionSpec(args.omega0, args.gamma)
    eps = args.eps if args.eps is not None else 1.0 / args.n_modes
    args.eps = eps
    dt = args.dt if args.dt is not None else 0.05 / spec.omega_max
    config = sim.SimConfig(
        n_modes=args.n_modes, eps=eps, nu=args.nu, temperature=args.temperature,
        dt=dt, n_realizations=args.realizations, seed=args.seed,
        control=_build_control(args, spec), max_steps=args.max_steps,
    )
    measure = _build_measure(args)
    snapshot_times = tuple(args.snapshots)
    summary = sim.run_ensemble(
        spec, config, measure, horizon_macro=args.horizon, snapshot_times=snapshot_times
    )
    out = Path(args.out)
    write_csv(
        out / "energy.csv",
        "energy",
        ["t_macro", "mean_energy", "stderr"],
        zip(summary.times_macro, summary.energy_mean, summary.energy_stderr),
    )
    for t_macro, psis in sorted(summary.snapshots.items()):
        grid = wigner.estimate_wigner(psis, t_macro, eps)
        gridio.save_grid(out / f"wigner_t{_fmt(t_macro)}.bin", grid)
    return EXIT_OK


def _closed_form_field(args, spec, grid_pos):
    eps = grid_pos.eps
    measure = _build_measure(args)
    if args.measure == "packet":
        def w0_fn(x, k):
            return sim.packet_w0(measure, eps, x, k)
    elif args.measure == "thermal":
        def w0_fn(x, k):
            mask = measure.edge_mask(np.asarray(k, dtype=float))
            return np.where(mask, measure.temperature, 0.0) * np.ones_like(
                np.asarray(x, dtype=float)
            )
    else:
        def w0_fn(x, k):
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(k)).shape)

    x_signed = grid_pos.x_grid - np.round(grid_pos.x_grid)
    if args.control == "impulsive":
        pulse = sim.ImpulsivePulse(width=args.pulse_width, eps=eps)
        script = lambda k: pulse.script_f(spec, k)
        return wigner.kinetic_impulsive(
            w0_fn, spec, args.nu, args.temperature, script, grid_pos.t,
            x_signed, grid_pos.k_grid, edge_policy="ballistic",
        )
    if args.control == "feedback":
        fb = _build_control(args, spec)
        synth = ctl.SynthesizedControl(t_grid=fb.t_grid, F=fb.F_N, N=None, F_N=fb.F_N)
        fhat_fn = lambda k: complex(ctl.fhat_of_control(synth, spec, [k])[0])
        return wigner.kinetic_feedback(
            w0_fn, spec, fhat_fn, args.nu, args.temperature, grid_pos.t,
            x_signed, grid_pos.k_grid, edge_policy="ballistic",
        )
    return wigner.kinetic_impulsive(
        w0_fn, spec, args.nu, args.temperature, None, grid_pos.t,
        x_signed, grid_pos.k_grid, edge_policy="ballistic",
    )


def cmd_compare(args) -> int:
    spec = DispersionSpec(args.omega0, args.gamma)
    grid = gridio.load_grid(args.snapshot)
    if getattr(grid, "space", None) == "xi":
        grid = wigner.to_position(grid)
    field = _closed_form_field(args, spec, grid)

    out = Path(args.out)
    rows = []
    dx = grid.x_grid[1] - grid.x_grid[0]
    dk = grid.k_grid[1] - grid.k_grid[0]
    x_signed = grid.x_grid - np.round(grid.x_grid)
    for name, o_fn in wigner.gaussian_battery():
        simulated = wigner.pair_with_test_function(grid, o_fn)
        closed = wigner.pair_with_test_function(field, o_fn)
        o_vals = o_fn(x_signed[:, None], grid.k_grid[None, :])
        se = float(np.sqrt(np.sum((o_vals * grid.stderr) ** 2)) * dx * dk)
        rows.append((name, simulated, closed, abs(simulated - closed), se))
    write_csv(
        out / "compare.csv",
        "compare",
        ["test_fn_id", "simulated", "closed_form", "abs_diff", "stderr"],
        rows,
    )

    if args.measure == "packet":
        measure = _build_measure(args)
        w0_vals = sim.packet_w0(
            measure, grid.eps, x_signed[:, None], grid.k_grid[None, :]
        )
        m0 = float(np.sum(w0_vals) * dx * dk)
        meas_t, meas_r, meas_a = wigner.energy_fractions(grid, args.k0, m0)
        th_t, th_r, th_a = wigner.energy_fractions(field, args.k0, m0)
        write_csv(
            out / "fractions.csv",
            "fractions",
            ["k0", "measured_t", "measured_r", "measured_a", "theory_t", "theory_r", "theory_a"],
            [(args.k0, meas_t, meas_r, meas_a, th_t, th_r, th_a)],
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _float_list(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phonoctl")
    parser.add_argument("--config", help="optional key=value config file; flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--omega0", type=float, required=True)
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--out", default=".")

    p_rates = sub.add_parser("rates", help="scattering rates on a wavenumber grid")
    common(p_rates)
    p_rates.add_argument("--nu", type=float, default=1.0)
    p_rates.add_argument("--grid", type=int, default=256)
    p_rates.add_argument("--kmin", type=float, default=0.05)
    p_rates.add_argument("--kmax", type=float, default=0.45)
    p_rates.add_argument(
        "--fhat", type=_float_list, default=None,
        help="constant feedback transfer value 're,im' instead of friction",
    )

    p_design = sub.add_parser("design", help="synthesize a control from target rates")
    common(p_design)
    p_design.add_argument("--targets", help="CSV with columns k,r_a,r_t,r_r")
    p_design.add_argument("--constant", type=_float_list, help="'r_a,r_t,r_r'")
    p_design.add_argument("--grid", type=int, default=64)
    p_design.add_argument("--kmin", type=float, default=0.05)
    p_design.add_argument("--kmax", type=float, default=0.45)
    p_design.add_argument("--n-sweep", type=_int_list, default=[8, 16, 32, 64])

    p_sim = sub.add_parser("simulate", help="Monte-Carlo chain simulation")
    common(p_sim)
    p_sim.add_argument("--nu", type=float, default=1.0)
    p_sim.add_argument("--temperature", type=float, default=0.0)
    p_sim.add_argument("--n-modes", type=int, default=512)
    p_sim.add_argument("--eps", type=float, default=None)
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.add_argument("--realizations", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--horizon", type=float, default=1.0)
    p_sim.add_argument("--snapshots", type=_float_list, default=[1.0])
    p_sim.add_argument("--max-steps", type=int, default=50_000_000)
    p_sim.add_argument("--measure", choices=["zero", "thermal", "packet"], default="thermal")
    p_sim.add_argument("--margin", type=float, default=0.02)
    p_sim.add_argument("--x0", type=float, default=-0.15)
    p_sim.add_argument("--sigma-x", type=float, default=0.04)
    p_sim.add_argument("--k0", type=float, default=0.25)
    p_sim.add_argument("--control", choices=["none", "impulsive", "feedback"], default="none")
    p_sim.add_argument("--pulse-width", type=float, default=0.5)
    p_sim.add_argument("--control-csv", default=None)

    p_cmp = sub.add_parser("compare", help="simulated vs closed-form kinetic field")
    common(p_cmp)
    p_cmp.add_argument("--snapshot", required=True, help="wigner .bin file")
    p_cmp.add_argument("--nu", type=float, default=1.0)
    p_cmp.add_argument("--temperature", type=float, default=0.0)
    p_cmp.add_argument("--eps", type=float, default=None)
    p_cmp.add_argument("--measure", choices=["zero", "thermal", "packet"], default="packet")
    p_cmp.add_argument("--margin", type=float, default=0.02)
    p_cmp.add_argument("--x0", type=float, default=-0.15)
    p_cmp.add_argument("--sigma-x", type=float, default=0.04)
    p_cmp.add_argument("--k0", type=float, default=0.25)
    p_cmp.add_argument("--control", choices=["none", "impulsive", "feedback"], default="none")
    p_cmp.add_argument("--pulse-width", type=float, default=0.5)
    p_cmp.add_argument("--control-csv", default=None)
    return parser


def _apply_config_file(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        defaults = {}
        for line in Path(known.config).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            defaults[key.strip().replace("-", "_")] = value.strip()
        for action in parser._subparsers._group_actions[0].choices.values():
            known_dests = {a.dest: a for a in action._actions}
            casted = {}
            for key, value in defaults.items():
                if key in known_dests and known_dests[key].type is not None:
                    casted[key] = known_dests[key].type(value)
                elif key in known_dests:
                    casted[key] = value
            action.set_defaults(**casted)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    handlers = {
        "rates": cmd_rates,
        "design": cmd_design,
        "simulate": cmd_simulate,
        "compare": cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except Inadmissible as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (ValueError, FileNotFoundError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PhonoctlError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
