"""Regenerate the packaged synthetic daily temperature fixture.

Writes data/synthetic_daily.csv: eight climate years (April-March) of a
seasonal sinusoid with known injected phase shifts, the largest being +25
days in the fifth year (1994).  The experiments and the application smoke
test read this file; rerunning the script reproduces it byte-for-byte.
"""

from pathlib import Path

from warpreg.peaks import synthetic_daily_series

OUT = Path(__file__).resolve().parent.parent / "data" / "synthetic_daily.csv"


def main() -> None:
    series = synthetic_daily_series(n_years=8, seed=2026)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w") as fh:
        fh.write("date,value\n")
        for d, v in zip(series.dates, series.values):
            fh.write(f"{d.isoformat()},{v}\n")
    print(f"wrote {OUT} ({len(series.dates)} rows)")


if __name__ == "__main__":
    main()
