import argparse
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from fellmorita.config import settings
from fellmorita.errors import UnknownDemo
from fellmorita.logging_config import setup_logging
from fellmorita.scenario.demos import demo_names, write_demo


@dataclass(frozen=True)
class DemoConfig:
    names: tuple[str, ...]
    out_dir: Path


def parse_args(argv: Optional[Sequence[str]] = None) -> DemoConfig:
    parser = argparse.ArgumentParser(description="Write demo scenario files.")
    parser.add_argument(
        "--name",
        action="append",
        default=[],
        help="Demo to write, e.g. group_algebra_Z3 or pauli_bundle (repeatable)",
    )
    parser.add_argument(
        "--out-dir",
        default=settings.demo_dir,
        help="Directory for the .scn files",
    )
    parser.add_argument("--all", action="store_true", help="Write every known demo")
    args = parser.parse_args(argv)
    names = tuple(demo_names()) if args.all else tuple(args.name)
    if not names:
        parser.error("give --name or --all")
    return DemoConfig(names=names, out_dir=Path(args.out_dir))


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_args(argv)
    setup_logging()
    try:
        for name in cfg.names:
            print(f"Saved demo: {write_demo(name, cfg.out_dir)}")
    except UnknownDemo as e:
        print(f"error: {e}")
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
