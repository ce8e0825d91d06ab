"""Command-line interface.

Subcommands: ``simulate`` (one scenario from a JSON config), ``check``
(invariant/oracle suite), ``case-study`` (both controller variants on the
reference transition), ``sweep`` (vary one config field over a range).

Exit codes: 0 success, 1 config error, 2 funnel violation, 3 domain exit,
4 integrator failure.
"""
import argparse
import json
import sys

from .errors import ConfigError, DomainError, FunnelViolation, IntegrationError
from .sim import ScenarioConfig, integrate, run_case_study, run_sweep, summarize

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FUNNEL = 2
EXIT_DOMAIN = 3
EXIT_INTEGRATOR = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2), which we reserve
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="funneltrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario from a JSON config")
    p_sim.add_argument("--config", required=True, help="path to a scenario JSON file")
    p_sim.add_argument("--mode", choices=("lin", "hg"), help="override the config's mode")
    p_sim.add_argument("--out", default="trajectory.csv", help="output CSV path")
    p_sim.add_argument("--t-end", type=float, help="override the config's horizon")

    sub.add_parser("check", help="run the invariant/oracle suite (exit 0/1)")

    p_case = sub.add_parser("case-study", help="reference transition, both variants")
    p_case.add_argument("--out-dir", default=".", help="directory for lin.csv/hg.csv/summary.json")
    p_case.add_argument("--no-disturbance", action="store_true",
                        help="drop the additive torque disturbance")

    p_sweep = sub.add_parser("sweep", help="vary one numeric config field")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--vary", required=True, metavar="FIELD=START:STOP:N",
                         help="e.g. disturbance.amp1=0:0.3:7 (dotted field path)")
    p_sweep.add_argument("--out", default="sweep.json", help="summary output path")
    p_sweep.add_argument("--serial", action="store_true", help="disable parallel execution")
    return parser


def _parse_vary(spec: str):
    try:
        field, rng = spec.split("=", 1)
        start, stop, n = rng.split(":")
        return field.strip(), float(start), float(stop), int(n)
    except ValueError as exc:
        raise ConfigError(f"--vary expects FIELD=START:STOP:N, got {spec!r}") from exc


def _overridden(cfg: ScenarioConfig, args) -> ScenarioConfig:
    data = cfg.to_dict()
    if getattr(args, "mode", None):
        data["mode"] = args.mode
    if getattr(args, "t_end", None) is not None:
        data["t_end"] = args.t_end
    return ScenarioConfig.from_dict(data)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "simulate":
            cfg = _overridden(ScenarioConfig.from_json_file(args.config), args)
            traj = integrate(cfg)
            traj.write_csv(args.out)
            print(json.dumps(summarize(cfg, traj), indent=2))
            return EXIT_OK
        if args.command == "check":
            from .checks import run_all
            return run_all()
        if args.command == "case-study":
            _, _, summary = run_case_study(args.out_dir, disturbed=not args.no_disturbance)
            print(json.dumps(summary, indent=2))
            return EXIT_OK
        if args.command == "sweep":
            cfg = ScenarioConfig.from_json_file(args.config)
            field, start, stop, n = _parse_vary(args.vary)
            results = run_sweep(cfg, field, start, stop, n, parallel=not args.serial)
            with open(args.out, "w") as fh:
                json.dump(results, fh, indent=2)
                fh.write("\n")
            for row in results:
                print(f"{field} = {row['value']:.6g}: {row['status']}")
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FunnelViolation as exc:
        print(f"funnel violation: {exc}", file=sys.stderr)
        return EXIT_FUNNEL
    except DomainError as exc:
        print(f"domain exit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except IntegrationError as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR


if __name__ == "__main__":
    sys.exit(main())
