"""Line-delimited JSON protocol over stdin/stdout.

One request object per input line ({source, data, timeout}), one result
object per output line, in input order. Exit code 0 unless the runner
itself is broken; program failures are encoded in the result objects.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .runner import SandboxRequest, execute


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optrunner",
        description="Execute generated optimization programs under a timeout",
    )
    parser.add_argument("--solver", choices=["highs"], default="highs",
                        help="solver backend for the modeling runtime")
    parser.add_argument("--parallel", type=int, default=1,
                        help="concurrent executions (requests still answer in order)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        lines = [line for line in sys.stdin.read().splitlines() if line.strip()]
        requests = [SandboxRequest.from_wire(json.loads(line)) for line in lines]
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"optrunner: bad request: {exc}", file=sys.stderr)
        return 1

    run = lambda req: execute(req, solver=args.solver)
    if args.parallel > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(run, requests))
    else:
        results = [run(req) for req in requests]

    for result in results:
        print(json.dumps(result), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
