import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from fellmorita.config import settings
from fellmorita.logging_config import setup_logging
from fellmorita.scenario.runner import RunConfig, run_scenario, save_report


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = argparse.ArgumentParser(description="Run the checks of a scenario file and report the results.")
    parser.add_argument("scenario", help="Path to a .scn scenario file (JSON)")
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="Numerical tolerance; overrides the scenario's own tol",
    )
    parser.add_argument(
        "--report",
        default=None,
        help="Write the machine-readable JSON report here",
    )
    parser.add_argument(
        "--check",
        default=None,
        help="Only keep records whose id starts with this prefix",
    )
    parser.add_argument(
        "--parallel",
        type=int,
        default=settings.max_workers,
        help="Worker threads for independent checks (1 = inline)",
    )
    args = parser.parse_args(argv)
    return RunConfig(
        scenario_path=Path(args.scenario),
        report_path=Path(args.report) if args.report else None,
        tol=args.tol,
        check_prefix=args.check,
        max_workers=max(1, int(args.parallel)),
    )


# ---------------------------------------------------------------------------
# Main
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_args(argv)
    setup_logging(logging.WARNING)

    result = run_scenario(
        cfg.scenario_path,
        cfg.tol,
        max_workers=cfg.max_workers,
        check_prefix=cfg.check_prefix,
    )
    print(result.report.to_text())

    if cfg.report_path is not None:
        save_report(cfg.report_path, result)
        print(f"Saved report: {cfg.report_path}", file=sys.stderr)

    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
