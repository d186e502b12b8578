"""Run the property suite and print one line per criterion."""

import argparse
import sys

from qginibre import serialize, verify


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--criteria", default="", help="comma-separated subset, default all")
    parser.add_argument("--draws", type=int, default=10_000)
    parser.add_argument("--json", help="also write the full report here")
    args = parser.parse_args()

    criteria = [int(c) for c in args.criteria.split(",") if c] or None
    report = verify.run_verify(criteria, draws=args.draws)
    for c in report.criteria:
        status = "PASS" if report.criterion_passed(c) else "FAIL"
        print(f"[{status}] criterion {c}")
        for r in report.results:
            if r.criterion == c:
                mark = " " if r.passed else "!"
                print(f"   {mark} {r.name}: {r.value:.4g} (tol {r.tolerance:g})")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(serialize.dumps_json(report.to_dict()))
    sys.exit(0 if report.passed else 3)


if __name__ == "__main__":
    main()
