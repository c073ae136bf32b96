#!/usr/bin/env python3
"""Reduce the two-year recidivism CSV to the columns the pipeline uses.

Keeps African-American, Caucasian and Hispanic defendants, codes sex as
1 = Male / 0 = Female, and writes race, sex, age, the four record counts and
two_year_recid.
"""
import argparse
import csv
import sys

RACES = {"African-American", "Caucasian", "Hispanic"}
COUNTS = ["priors_count", "juv_other_count", "juv_fel_count", "juv_misd_count"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("raw", help="compas-scores-two-years.csv")
    ap.add_argument("out", help="output CSV")
    args = ap.parse_args()

    with open(args.raw, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        # The raw file repeats some column names; the first occurrence wins.
        index = {}
        for i, name in enumerate(header):
            index.setdefault(name, i)
        missing = [c for c in ["race", "sex", "age", "two_year_recid", *COUNTS] if c not in index]
        if missing:
            print(f"missing columns: {', '.join(missing)}", file=sys.stderr)
            return 1
        rows = []
        for rec in reader:
            race = rec[index["race"]]
            if race not in RACES:
                continue
            rows.append([race, "1" if rec[index["sex"]] == "Male" else "0", rec[index["age"]],
                         *(rec[index[c]] for c in COUNTS), rec[index["two_year_recid"]]])

    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["race", "sex", "age", *COUNTS, "two_year_recid"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
