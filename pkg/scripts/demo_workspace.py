#!/usr/bin/env python3
"""Generate a small synthetic workspace, analyze it, and print the report.

Usage:
    python scripts/demo_workspace.py [--seed N] [--days N] [--keep DIR]
"""

from __future__ import annotations

import argparse
import tempfile
from pathlib import Path

from parem.metrics import ObservationWindow
from parem.pipeline import RunConfig, run_analysis
from parem.synth import CorpusSpec, generate_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--days", type=int, default=14)
    parser.add_argument("--keep", help="write corpus and outputs here instead of a temp dir")
    args = parser.parse_args()

    if args.keep:
        base = Path(args.keep)
        base.mkdir(parents=True, exist_ok=True)
        run(base, args.seed, args.days)
    else:
        with tempfile.TemporaryDirectory() as td:
            run(Path(td), args.seed, args.days)
    return 0


def run(base: Path, seed: int, days: int) -> None:
    ground_truth = generate_corpus(CorpusSpec(seed=seed, days=days), base / "corpus")
    config = RunConfig(
        root=str(base / "corpus" / "workspace"),
        out_dir=str(base / "out"),
        window=ObservationWindow(ground_truth.window_start, ground_truth.window_end),
        dedup_ledger=True,
    )
    bundle, written = run_analysis(config)
    print((base / "out" / "reports" / "report.txt").read_text())
    print("generator ground truth vs analyzer:")
    print(f"  records: {ground_truth.drc} vs {bundle.dedup_stats.retained_count}")
    print(f"  active days: {ground_truth.active_days} vs {bundle.metrics.active_day_count}")
    print(f"  output proxies: {ground_truth.output_proxies} vs {len(bundle.output_proxies)}")
    print(f"  cdr: {ground_truth.cdr} vs {bundle.token_totals.cdr}")
    print(f"files written: {len(written)}")


if __name__ == "__main__":
    raise SystemExit(main())
