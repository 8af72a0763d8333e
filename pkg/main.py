# depth_ruin/main.py
"""
Depth-ruin toolkit
Main entry point: compute, simulate, compare and sweep Gerber-Shiu values
"""

import argparse
import csv
import json
import logging
import sys
import time
from typing import Any, Dict, List, Optional, TextIO

from config.settings import Settings, build_run_config
from data.exceptions import DepthRuinError
from pipeline.orchestrator import (COMPARE_COLUMNS, COMPUTE_COLUMNS, SIMULATE_COLUMNS, SWEEP_AXES,
                                   SWEEP_COLUMNS, GerberShiuPipeline)

COMMANDS = ('compute', 'simulate', 'compare', 'sweep')


def setup_logging(level: str = 'INFO', log_file: str = 'depth_ruin.log'):
    """Configure UTF-8 logging; stdout stays free for results"""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler(sys.stderr)
        ],
        force=True
    )


def format_value(value: Any) -> str:
    """Floats print with round-trip precision so reruns diff byte for byte"""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, '.17g')
    return str(value)


def write_rows(rows: List[Dict[str, Any]], columns: List[str], stream: TextIO, as_json: bool = False):
    """Write rows as CSV with a fixed header, or as line-delimited JSON"""
    if as_json:
        for row in rows:
            stream.write(json.dumps({column: row.get(column, '') for column in columns}) + '\n')
        return

    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column, '')) for column in columns])


def save_results(rows: List[Dict[str, Any]], columns: List[str], output_file: Optional[str], as_json: bool):
    if output_file:
        with open(output_file, 'w', encoding='utf-8', newline='') as f:
            write_rows(rows, columns, f, as_json)
    else:
        write_rows(rows, columns, sys.stdout, as_json)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Depth-ruin toolkit - Gerber-Shiu functions at excursion-marked bankruptcy')
    parser.add_argument('command', nargs='?', choices=COMMANDS, help='What to run')
    parser.add_argument('--config', type=str, default='config/config.ini', help='Configuration file path')
    parser.add_argument('--out', type=str, help='Output file (default: standard output)')
    parser.add_argument('--json', action='store_true', help='Emit line-delimited JSON instead of CSV')
    parser.add_argument('--seed', type=int, help='Simulation seed (overrides config)')
    parser.add_argument('--paths', type=int, help='Number of Monte Carlo paths (overrides config)')
    parser.add_argument('--workers', type=int, help='Worker processes; 0 means one per physical core')
    parser.add_argument('--z-max', type=float, dest='z_max', help='Largest tolerated |z| in compare')
    parser.add_argument('--axis', choices=SWEEP_AXES, default='x', help='Sweep axis')
    parser.add_argument('--print-config', action='store_true', help='Print the fully-defaulted configuration')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    return parser


def apply_overrides(settings: Settings, args: argparse.Namespace):
    """CLI flags override both the config file and the environment"""
    overrides = {
        ('SIMULATION', 'seed'): args.seed,
        ('SIMULATION', 'n_paths'): args.paths,
        ('SIMULATION', 'workers'): args.workers,
        ('COMPARE', 'z_max'): args.z_max
    }
    for (section, key), value in overrides.items():
        if value is not None:
            settings.set(section, key, value)


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command and not args.print_config:
        parser.error("a command or --print-config must be specified")

    try:
        settings = Settings(args.config)
        apply_overrides(settings, args)
    except DepthRuinError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    if args.print_config:
        if args.out:
            settings.save(args.out)
        else:
            sys.stdout.write(settings.dump())
        return 0

    level = 'DEBUG' if args.verbose else settings.get('LOGGING', 'level', 'INFO')
    setup_logging(level, settings.get('LOGGING', 'log_file', 'depth_ruin.log'))
    logger = logging.getLogger(__name__)

    start_time = time.time()
    try:
        run = build_run_config(settings)
        pipeline = GerberShiuPipeline(run)

        if args.command == 'compute':
            rows, columns = pipeline.compute(), COMPUTE_COLUMNS
        elif args.command == 'simulate':
            rows, columns = pipeline.simulate(), SIMULATE_COLUMNS
        elif args.command == 'compare':
            rows, columns = pipeline.compare(), COMPARE_COLUMNS
        else:
            rows, columns = pipeline.sweep(args.axis), SWEEP_COLUMNS

        save_results(rows, columns, args.out, args.json)
        if args.command == 'compare':
            pipeline.require_agreement()
    except DepthRuinError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return e.exit_code

    failed = sum(1 for row in rows if row.get('status') != 'ok')
    logger.info("=== RUN SUMMARY ===")
    logger.info(f"Command: {args.command}")
    logger.info(f"Rows written: {len(rows)} ({failed} with errors)")
    logger.info(f"Total time: {time.time() - start_time:.2f}s")
    if args.out:
        logger.info(f"Results saved to: {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
