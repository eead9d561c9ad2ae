#!/usr/bin/env python3
"""Write the self-motion trace, singularity surfaces and a check report."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

# Add parent to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from ppps.config import load_options
from ppps.model import ActuatedJoints
from ppps.report import generate_report, run_checks
from ppps.selfmotion import FAMILY_CSV_COLUMNS, cardanic_family, family_csv_rows
from ppps.serialize import to_csv
from ppps.singularity import SURFACE_CSV_COLUMNS, sample_singularity_surfaces


def main() -> int:
    """Main entry point."""
    parser = argparse.ArgumentParser(description="Reproduce figure data for the 3-PPPS robot")
    parser.add_argument("--output-dir", default="figures", help="Directory for CSV files and the report")
    parser.add_argument("--config", help="YAML or JSON options file")
    parser.add_argument("--resolution", type=int, help="Surface grid density")
    parser.add_argument("--samples", type=int, help="Family members in the trace")
    parser.add_argument("--skip-report", action="store_true", help="Only write the CSV files")

    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    start_time = time.time()
    options = load_options(args.config).merged({"resolution": args.resolution, "family_samples": args.samples})
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    family = cardanic_family(ActuatedJoints.zeros())
    samples = family.sample(options.family_samples)
    (out / "selfmotion_trace.csv").write_text(to_csv(FAMILY_CSV_COLUMNS, family_csv_rows(samples)))
    print(f"Family trace: {len(samples)} members")

    points = sample_singularity_surfaces(options.resolution)
    (out / "singularity_surfaces.csv").write_text(to_csv(SURFACE_CSV_COLUMNS, [p.csv_row() for p in points]))
    circle = [p for p in points if p.surface_id == "selfmotion_circle"]
    (out / "selfmotion_circle.csv").write_text(to_csv(SURFACE_CSV_COLUMNS, [p.csv_row() for p in circle]))
    print(f"Surfaces: {len(points)} points ({len(circle)} on the self-motion circle)")

    if args.skip_report:
        return 0

    results = run_checks(options)
    report_path = generate_report(results, start_time, out)
    print(f"Report: {report_path}")
    return 0 if all(r["passed"] for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
