r"""Reproducible experiment runner.

Subcommands: sample, neutralize, corollary-check, align-verify, bound-sweep,
dof-sweep, region-check, formulas.  Every option can also be supplied through
a flat key=value config file (--config); command-line flags take precedence
and unknown config keys are rejected.  Every artifact embeds the tool version
and the fully resolved option set, so identical invocations produce
byte-identical outputs.

Exit codes: 0 success, 1 usage error, 2 verification failure.  The
environment variable DOFLAB_THREADS caps internal parallelism (power-grid
points of bound sweeps run on a thread pool).
"""

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .alignment import AlignmentConfig, run_alignment, run_alignment_seeded
from .bounds import bound_curve, counting_identity_check, dof_upper
from .channel import (
    ARITH_FLOAT,
    ARITHMETICS,
    MODES,
    ChannelRealization,
    NetworkConfig,
    degenerate_two_user_channel,
    full_cancellation_three_user_channel,
    sample_channel,
)
from .alignment import achieved_dof_formula
from .neutralization import (
    DofPoint,
    FullCancellationConditionError,
    RelayGainZeroError,
    check_corollary_conditions,
    dof_region_contains,
    solve_three_user_full,
    solve_three_user_pair,
    solve_two_user,
)
from .rates import (
    DEFAULT_STEP_DB,
    DEFAULT_WINDOW_DB,
    estimate_dof,
    neutralization_rate_curve,
)


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _parse_bool(text):
    if isinstance(text, bool):
        return text
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# dest -> (type, default, help); shared across CLI flags and config files
_OPTIONS = {
    "sample": {
        "K": (int, None, "number of user pairs"),
        "mode": (str, "varying", f"channel mode, one of {MODES}"),
        "seed": (int, 0, "sampling seed"),
        "slots": (int, 1, "number of time slots"),
        "arithmetic": (str, ARITH_FLOAT, f"one of {ARITHMETICS}"),
        "denominator_bound": (int, 16, "denominator bound in rational mode"),
        "out": (str, None, "output channel JSON path"),
    },
    "neutralize": {
        "channel": (str, None, "input channel JSON path"),
        "degenerate_factory": (str, None, "build a collapse-set instance: 'two-user'"),
        "factory": (str, None, "build a named instance: 'full-cancel-three-user'"),
        "factory_seed": (int, 0, "seed for factory instances"),
        "arithmetic": (str, ARITH_FLOAT, "arithmetic for factory instances"),
        "silent": (int, None, "3-user networks: user kept silent"),
        "full": (_parse_bool, False, "3-user networks: cancel all six cross links"),
        "out": (str, None, "output solution JSON path"),
    },
    "corollary-check": {
        "channel": (str, None, "input channel JSON path"),
        "factory": (str, None, "build a named instance: 'full-cancel-three-user'"),
        "arithmetic": (str, ARITH_FLOAT, "arithmetic for factory instances"),
        "out": (str, None, "output report JSON path"),
    },
    "align-verify": {
        "channel": (str, None, "input channel JSON path"),
        "K": (int, None, "users (when sampling internally)"),
        "seed": (int, 0, "channel/precoder seed"),
        "mu": (int, None, "extension length (K=3 only; default 3)"),
        "n_level": (int, 1, "exponent bound of the precoder product box"),
        "gamma": (int, None, "number of product-box matrices (default 6(K-3))"),
        "arithmetic": (str, "rational", "verification arithmetic"),
        "denominator_bound": (int, 16, "denominator bound in rational mode"),
        "out": (str, None, "output report JSON path"),
    },
    "bound-sweep": {
        "channel": (str, None, "input 2-user channel JSON path"),
        "pmin_db": (float, DEFAULT_WINDOW_DB[0], "sweep start in dB"),
        "pmax_db": (float, DEFAULT_WINDOW_DB[1], "sweep end in dB"),
        "step_db": (float, DEFAULT_STEP_DB, "sweep step in dB"),
        "out": (str, None, "output CSV path"),
    },
    "dof-sweep": {
        "channel": (str, None, "input channel JSON path"),
        "degenerate_factory": (str, None, "build a collapse-set instance: 'two-user'"),
        "factory": (str, None, "build a named instance: 'full-cancel-three-user'"),
        "factory_seed": (int, 0, "seed for factory instances"),
        "arithmetic": (str, ARITH_FLOAT, "arithmetic for factory instances"),
        "silent": (int, None, "3-user networks: user kept silent"),
        "full": (_parse_bool, False, "3-user networks: cancel all six cross links"),
        "pmin_db": (float, DEFAULT_WINDOW_DB[0], "sweep start in dB"),
        "pmax_db": (float, DEFAULT_WINDOW_DB[1], "sweep end in dB"),
        "step_db": (float, DEFAULT_STEP_DB, "sweep step in dB"),
        "out": (str, None, "output CSV path"),
        "dof_out": (str, None, "output DoF-estimate JSON path"),
    },
    "region-check": {
        "out": (str, None, "output JSON path"),
    },
    "formulas": {
        "K": (int, None, "number of user pairs"),
        "n_level": (int, None, "also print the alignment stream total for this n"),
        "gamma": (int, None, "product-box size for the stream total"),
        "out": (str, None, "output JSON path"),
    },
}

_REQUIRED = {
    "sample": ("K", "out"),
    "neutralize": (),
    "corollary-check": (),
    "align-verify": (),
    "bound-sweep": ("channel", "out"),
    "dof-sweep": ("out",),
    "region-check": (),
    "formulas": ("K",),
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="doflab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"doflab {__version__}")
    sub = parser.add_subparsers(dest="subcommand")
    for name, options in _OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        for dest, (typ, _default, help_text) in options.items():
            flag = "--" + dest.replace("_", "-")
            p.add_argument(flag, dest=dest, type=str,
                           default=argparse.SUPPRESS, help=help_text)
        if name == "region-check":
            p.add_argument("--point", dest="point", action="append", default=None,
                           help="DoF point as comma-separated rationals, e.g. 1,1/2,0")
    return parser


def _read_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _resolve(subcommand: str, args: argparse.Namespace) -> dict:
    options = _OPTIONS[subcommand]
    resolved = {dest: default for dest, (_t, default, _h) in options.items()}
    config_path = getattr(args, "config", None)
    if config_path:
        for key, value in _read_config(config_path).items():
            if key not in options:
                raise UsageError(f"unknown config key {key!r} for {subcommand}")
            typ = options[key][0]
            try:
                resolved[key] = typ(value)
            except ValueError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
    for dest, (typ, _default, _h) in options.items():
        if hasattr(args, dest):
            try:
                resolved[dest] = typ(getattr(args, dest))
            except ValueError as exc:
                raise UsageError(f"option --{dest.replace('_', '-')}: {exc}") from exc
    for dest in _REQUIRED[subcommand]:
        if resolved[dest] is None:
            raise UsageError(f"{subcommand} requires --{dest.replace('_', '-')}")
    return resolved


def _spec_payload(subcommand: str, resolved: dict) -> dict:
    spec = {"subcommand": subcommand}
    spec.update({k: resolved[k] for k in sorted(resolved)})
    return spec


def _write_json(path: str, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fmt_float(x: float) -> str:
    return f"{float(x):.12g}"


def _write_csv(path: str, spec: dict, header, rows):
    lines = [f"# tool_version={__version__}"]
    for key in sorted(spec):
        lines.append(f"# {key}={spec[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt_float(x) if isinstance(x, float) else str(x)
                              for x in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_channel(path: str) -> ChannelRealization:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return ChannelRealization.from_json_dict(doc)


def _channel_from_options(resolved: dict) -> ChannelRealization:
    sources = [resolved.get("channel"), resolved.get("degenerate_factory"),
               resolved.get("factory")]
    if sum(s is not None for s in sources) != 1:
        raise UsageError("provide exactly one of --channel, --degenerate-factory, "
                         "--factory")
    if resolved.get("channel"):
        return _load_channel(resolved["channel"])
    if resolved.get("degenerate_factory"):
        if resolved["degenerate_factory"] != "two-user":
            raise UsageError(f"unknown degenerate factory "
                             f"{resolved['degenerate_factory']!r}")
        return degenerate_two_user_channel(seed=resolved.get("factory_seed", 0),
                                           arithmetic=resolved["arithmetic"])
    if resolved["factory"] != "full-cancel-three-user":
        raise UsageError(f"unknown factory {resolved['factory']!r}")
    return full_cancellation_three_user_channel(arithmetic=resolved["arithmetic"])


def _threads() -> int:
    raw = os.environ.get("DOFLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"DOFLAB_THREADS must be an integer, got {raw!r}")


def _power_grid(resolved: dict):
    lo, hi, step = resolved["pmin_db"], resolved["pmax_db"], resolved["step_db"]
    if step <= 0 or hi < lo:
        raise UsageError("need pmin_db <= pmax_db and step_db > 0")
    n = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(n)]


def _solve_from_options(chan: ChannelRealization, resolved: dict):
    if chan.num_users == 2:
        return solve_two_user(chan)
    if chan.num_users == 3:
        if resolved.get("full"):
            return solve_three_user_full(chan)
        if resolved.get("silent") is not None:
            return solve_three_user_pair(chan, resolved["silent"])
        raise UsageError("3-user networks need --silent USER or --full true")
    raise UsageError(f"no neutralization scheme for K={chan.num_users}")


def _cmd_sample(resolved: dict) -> int:
    config = NetworkConfig(num_users=resolved["K"], mode=resolved["mode"],
                           seed=resolved["seed"], arithmetic=resolved["arithmetic"],
                           rational_denominator_bound=resolved["denominator_bound"])
    chan = sample_channel(config, resolved["slots"])
    payload = chan.to_json_dict()
    payload["tool_version"] = __version__
    payload["spec"] = _spec_payload("sample", resolved)
    _write_json(resolved["out"], payload)
    return 0


def _cmd_neutralize(resolved: dict) -> int:
    chan = _channel_from_options(resolved)
    try:
        sol = _solve_from_options(chan, resolved)
    except (RelayGainZeroError, FullCancellationConditionError) as exc:
        print(f"neutralization failed: {exc}", file=sys.stderr)
        return 2
    payload = sol.to_json_dict()
    payload["tool_version"] = __version__
    payload["spec"] = _spec_payload("neutralize", resolved)
    _write_json(resolved["out"], payload)
    return 0


def _cmd_corollary_check(resolved: dict) -> int:
    chan = _channel_from_options(resolved)
    report = check_corollary_conditions(chan)
    payload = report.to_json_dict()
    payload["tool_version"] = __version__
    payload["spec"] = _spec_payload("corollary-check", resolved)
    _write_json(resolved["out"], payload)
    if not report.all_pass:
        print(f"full-cancellation check failed: {report.first_failure()}",
              file=sys.stderr)
        return 2
    return 0


def _cmd_align_verify(resolved: dict) -> int:
    if resolved.get("channel"):
        chan = _load_channel(resolved["channel"])
        config = AlignmentConfig(num_users=chan.num_users,
                                 n_level=resolved["n_level"],
                                 gamma=resolved["gamma"], mu=resolved["mu"])
        report = run_alignment(chan, config, precoder_seed=resolved["seed"])
    else:
        if resolved.get("K") is None:
            raise UsageError("align-verify needs --channel or --K")
        config = AlignmentConfig(num_users=resolved["K"],
                                 n_level=resolved["n_level"],
                                 gamma=resolved["gamma"], mu=resolved["mu"])
        report = run_alignment_seeded(config, seed=resolved["seed"],
                                      arithmetic=resolved["arithmetic"],
                                      denominator_bound=resolved["denominator_bound"])
    payload = report.to_json_dict()
    payload["tool_version"] = __version__
    payload["spec"] = _spec_payload("align-verify", resolved)
    _write_json(resolved["out"], payload)
    if not report.all_pass:
        for failure in report.failures():
            print(f"alignment check failed: user {failure.user}: {failure.note}",
                  file=sys.stderr)
        return 2
    return 0


def _cmd_bound_sweep(resolved: dict) -> int:
    chan = _load_channel(resolved["channel"])
    grid = _power_grid(resolved)
    curve = bound_curve(chan, grid, max_workers=_threads())
    header = ["P_dB", "bound_bits", "P1", "P2", "Pr", "rho1", "rho2"]
    rows = []
    for p_db, opt in zip(curve.p_grid_db, curve.optima):
        c = opt.cov
        rows.append([p_db, opt.value_bits, c.p1, c.p2, c.pr, c.rho1, c.rho2])
    _write_csv(resolved["out"], _spec_payload("bound-sweep", resolved), header, rows)
    return 0


def _cmd_dof_sweep(resolved: dict) -> int:
    chan = _channel_from_options(resolved)
    try:
        sol = _solve_from_options(chan, resolved)
    except (RelayGainZeroError, FullCancellationConditionError) as exc:
        print(f"neutralization failed: {exc}", file=sys.stderr)
        return 2
    grid = _power_grid(resolved)
    curve = neutralization_rate_curve(sol, grid)
    K = sol.total_users
    header = ["P_dB"] + [f"R{u}" for u in range(1, K + 1)] + ["Rsum"]
    rows = []
    for i, p_db in enumerate(curve.p_grid_db):
        rows.append([p_db] + [float(curve.per_user_rates[i, u]) for u in range(K)]
                    + [curve.sum_rate_bits[i]])
    spec = _spec_payload("dof-sweep", resolved)
    _write_csv(resolved["out"], spec, header, rows)
    estimate = estimate_dof(curve, window=(resolved["pmin_db"], resolved["pmax_db"]))
    payload = estimate.to_json_dict()
    payload["scheme_id"] = curve.scheme_id
    payload["tool_version"] = __version__
    payload["spec"] = spec
    _write_json(resolved.get("dof_out"), payload)
    return 0


def _cmd_region_check(resolved: dict, points) -> int:
    if not points:
        raise UsageError("region-check needs at least one --point")
    results = []
    for text in points:
        parts = [Fraction(p.strip()) for p in text.split(",")]
        point = DofPoint(tuple(parts))
        results.append({"d": [f"{x.numerator}/{x.denominator}" for x in point.d],
                        "contains": dof_region_contains(point)})
    payload = {"points": results, "tool_version": __version__,
               "spec": _spec_payload("region-check", resolved)}
    _write_json(resolved["out"], payload)
    return 0


def _cmd_formulas(resolved: dict) -> int:
    K = resolved["K"]
    upper = dof_upper(K)
    lines = [f"dof_upper(K={K}) = {upper}"]
    result = {"K": K, "dof_upper": f"{upper.numerator}/{upper.denominator}"}
    if K >= 3:
        ok = counting_identity_check(K)
        lines.append(f"triple-counting identity (K={K}): {'ok' if ok else 'FAILED'}")
        result["counting_identity"] = ok
        if resolved.get("n_level") is not None:
            n = resolved["n_level"]
            total = achieved_dof_formula(K, n, resolved.get("gamma"))
            lines.append(f"alignment stream total (n={n}) = {total}")
            result["stream_total"] = f"{total.numerator}/{total.denominator}"
    for line in lines:
        print(line)
    if resolved.get("out"):
        result["tool_version"] = __version__
        result["spec"] = _spec_payload("formulas", resolved)
        _write_json(resolved["out"], result)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("missing subcommand")
        resolved = _resolve(args.subcommand, args)
        if args.subcommand == "sample":
            return _cmd_sample(resolved)
        if args.subcommand == "neutralize":
            return _cmd_neutralize(resolved)
        if args.subcommand == "corollary-check":
            return _cmd_corollary_check(resolved)
        if args.subcommand == "align-verify":
            return _cmd_align_verify(resolved)
        if args.subcommand == "bound-sweep":
            return _cmd_bound_sweep(resolved)
        if args.subcommand == "dof-sweep":
            return _cmd_dof_sweep(resolved)
        if args.subcommand == "region-check":
            return _cmd_region_check(resolved, getattr(args, "point", None))
        if args.subcommand == "formulas":
            return _cmd_formulas(resolved)
        raise UsageError(f"unknown subcommand {args.subcommand!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
