#!/usr/bin/env python3
"""Recomputes the synthetic pipeline outputs from the fixture and the planted
groups, then compares them with a CSV_CR / CSV_GRAPH pair.

    verify_pipeline.py FIXTURE PLANTED CR_CSV GRAPH_CSV

Variant ids follow byte order of the raw strings, clusters are named after
their smallest member id, a merged variant keeps the raw string of the member
with the highest count (ties: smallest raw). Parsed columns other than rpy are
not checked here.
"""

import csv
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "fixtures"))
from count_fixture import read_records, rpy_of, windowed  # noqa: E402


def expected(fixture, planted_path):
    records = windowed(read_records(fixture), (1962, 2018), (1900, 1995))
    citing = {}
    for i, r in enumerate(records):
        for cr in set(r["cr"]):
            citing.setdefault(cr, set()).add(i)
    raws = sorted(citing, key=lambda s: s.encode("utf-8"))
    vid = {raw: "V%06d" % (k + 1) for k, raw in enumerate(raws)}

    with open(planted_path) as f:
        planted = json.load(f)
    groups = [[g for g in group if g in citing] for group in planted["groups"]]
    grouped = {raw for g in groups for raw in g}
    groups += [[raw] for raw in raws if raw not in grouped]

    rows = []
    for g in groups:
        ids = sorted(vid[raw] for raw in g)
        rep = min(g, key=lambda raw: (-len(citing[raw]), raw.encode("utf-8")))
        union = set().union(*(citing[raw] for raw in g))
        rows.append({"variant_id": vid[rep], "raw": rep, "rpy": rpy_of(rep), "ncr": len(union),
                     "cluster_id": "C" + ids[0][1:]})
    rows = [r for r in rows if not (0 <= r["ncr"] <= 1)]
    rows.sort(key=lambda r: r["variant_id"])
    return rows


def median(xs):
    xs = sorted(xs)
    n = len(xs)
    return xs[n // 2] if n % 2 else (xs[n // 2 - 1] + xs[n // 2]) / 2


def number(x):
    x = float(x)
    if x == 0:
        return "0"
    return str(int(x)) if x.is_integer() else repr(x)


def graph(rows):
    years = [r["rpy"] for r in rows if r["rpy"] is not None]
    lo, hi = min(years), max(years)
    ncr = {y: 0 for y in range(lo, hi + 1)}
    distinct = {y: 0 for y in range(lo, hi + 1)}
    for r in rows:
        if r["rpy"] is not None:
            ncr[r["rpy"]] += r["ncr"]
            distinct[r["rpy"]] += 1
    series = [ncr[y] for y in range(lo, hi + 1)]
    out = [["rpy", "ncr", "distinct_variants", "median_dev"]]
    for i, y in enumerate(range(lo, hi + 1)):
        window = series[max(0, i - 2): i + 3]
        out.append([str(y), str(series[i]), str(distinct[y]), number(series[i] - median(window))])
    return out


def main(fixture, planted, cr_path, graph_path):
    want = expected(fixture, planted)
    with open(cr_path, newline="", encoding="utf-8") as f:
        got = list(csv.DictReader(f))
    problems = []
    if len(got) != len(want):
        problems.append("CSV_CR has %d rows, expected %d" % (len(got), len(want)))
    for g, w in zip(got, want):
        actual = {"variant_id": g["variant_id"], "raw": g["raw"], "rpy": int(g["rpy"]) if g["rpy"] else None,
                  "ncr": int(g["ncr"]), "cluster_id": g["cluster_id"]}
        if actual != w:
            problems.append("CSV_CR row %s differs: got %s" % (w, actual))
    with open(graph_path, newline="", encoding="utf-8") as f:
        got_graph = list(csv.reader(f))
    if got_graph != graph(want):
        problems.append("CSV_GRAPH differs from the recomputed spectrum")
    for p in problems[:10]:
        print(p)
    if problems:
        return 1
    print("ok: %d variants, %d years" % (len(want), len(got_graph) - 1))
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:5]))
