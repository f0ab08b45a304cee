#!/usr/bin/env python3
"""Rebuild a GeoNames ``admin1CodesASCII.txt`` from two public derivatives.

The sandbox this project was developed in could not reach download.geonames.org.
``cities15000.txt`` carries each city's admin1 *code* and the reverse_geocoder
package's ``rg_cities1000.csv`` carries each city's admin1 *name*; joining the
two on (country, name, rounded coordinates) recovers the code -> name table.
When a code maps to several names the most frequent one wins.

With network access, prefer the real file:
    http://download.geonames.org/export/dump/admin1CodesASCII.txt

Usage:
    python scripts/rebuild_admin1.py cities15000.txt rg_cities1000.csv > admin1CodesASCII.txt
"""

import csv
import sys
import unicodedata
from collections import Counter, defaultdict


def _ascii(name):
    folded = unicodedata.normalize("NFKD", name)
    return "".join(c for c in folded if not unicodedata.combining(c)).encode("ascii", "ignore").decode()


def main(argv):
    cities_path, rg_path = argv[1], argv[2]
    admin1_by_city = {}
    with open(rg_path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["cc"], row["name"], round(float(row["lat"]), 2), round(float(row["lon"]), 2))
            admin1_by_city.setdefault(key, row["admin1"])

    votes = defaultdict(Counter)
    with open(cities_path, encoding="utf-8") as fh:
        for line in fh:
            f = line.rstrip("\n").split("\t")
            key = (f[8], f[1], round(float(f[4]), 2), round(float(f[5]), 2))
            name = admin1_by_city.get(key)
            if name and f[10]:
                votes[f"{f[8]}.{f[10]}"][name] += 1

    out = sys.stdout
    for code in sorted(votes):
        # ties resolved alphabetically for a stable output
        name = sorted(votes[code].items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        out.write(f"{code}\t{name}\t{_ascii(name)}\t\n")


if __name__ == "__main__":
    main(sys.argv)
