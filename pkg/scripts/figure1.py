"""Write the root scatter of 1 - z^n - (1 - z)^n (2 <= n <= nmax) as CSV and SVG."""
import argparse
from pathlib import Path

from freethin import __version__
from freethin.qn_roots import figure1_rows, root_checks, rows_to_csv, rows_to_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=32)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = figure1_rows(args.nmax)
    (out / "figure1.csv").write_text(rows_to_csv(rows))
    (out / "figure1.svg").write_text(rows_to_svg(rows, version=__version__))

    report = root_checks(min(args.nmax, 64))
    print(f"{len(rows)} roots written to {out}/figure1.csv and {out}/figure1.svg")
    print(" n  roots  on Re=1/2  required")
    for r in report.rows:
        print(f"{r.n:2d}  {r.n_roots:5d}  {r.half_line_count:9d}  {'yes' if r.half_line_required else 'no'}")
    print("all checks passed" if report.ok else "CHECK FAILED")


if __name__ == "__main__":
    main()
