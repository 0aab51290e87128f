"""CLI command modules. Each exposes register(subparsers) and run(cfg)."""

from commands import bench, compare, measure, plan, scan, tomo

COMMANDS = (plan, measure, scan, tomo, compare, bench)
