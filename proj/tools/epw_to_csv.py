#!/usr/bin/env python3
"""Convert an EnergyPlus EPW file to the weather CSV read by `dcsynth`.

Output columns: hour,dry_bulb_c,rh_pct,pressure_pa (hour is 0-based).
"""
import argparse
import csv
import sys

EPW_HEADER_LINES = 8
DRY_BULB, REL_HUM, PRESSURE = 6, 8, 9


def convert(src, dst, start=0, hours=None):
    reader = csv.reader(src)
    for _ in range(EPW_HEADER_LINES):
        next(reader)
    out = csv.writer(dst, lineterminator="\n")
    out.writerow(["hour", "dry_bulb_c", "rh_pct", "pressure_pa"])
    n = 0
    for i, row in enumerate(reader):
        if i < start:
            continue
        if hours is not None and n >= hours:
            break
        out.writerow([n, row[DRY_BULB], row[REL_HUM], row[PRESSURE]])
        n += 1
    return n


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("epw")
    ap.add_argument("-o", "--out", help="output CSV (default: stdout)")
    ap.add_argument("--start", type=int, default=0, help="first hour of the year to keep")
    ap.add_argument("--hours", type=int, help="number of hours to keep")
    args = ap.parse_args()
    with open(args.epw, newline="", encoding="latin-1") as src:
        if args.out:
            with open(args.out, "w", newline="") as dst:
                n = convert(src, dst, args.start, args.hours)
        else:
            n = convert(src, sys.stdout, args.start, args.hours)
    print(f"{n} hours", file=sys.stderr)


if __name__ == "__main__":
    main()
