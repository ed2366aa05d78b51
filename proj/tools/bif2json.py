#!/usr/bin/env python3
"""Convert a discrete BIF network to the JSON layout read by `wmcvar bn`.

Only the row form of conditional tables is accepted, i.e. the form written
by bnlearn's write.bif:

    probability ( B | A ) {
      (a0) 0.9, 0.1;
      (a1) 0.2, 0.8;
    }
"""

import argparse
import itertools
import json
import re
import sys

VARIABLE = re.compile(
    r"variable\s+([^\s{]+)\s*\{[^}]*?type\s+discrete\s*\[\s*(\d+)\s*\]\s*\{([^}]*)\}",
    re.S)
PROBABILITY = re.compile(r"probability\s*\(\s*([^)]*?)\s*\)\s*\{(.*?)\}", re.S)
ROW = re.compile(r"\(([^)]*)\)\s*([^;]*);")
TABLE = re.compile(r"table\s+([^;]*);")


def split_list(text):
    return [t.strip() for t in text.replace("\n", " ").split(",") if t.strip()]


def numbers(text):
    return [float(t) for t in split_list(text)]


def convert(text, theta):
    text = re.sub(r"//[^\n]*", "", text)
    values = {}
    order = []
    for name, arity, vals in VARIABLE.findall(text):
        vs = split_list(vals)
        if len(vs) != int(arity):
            raise ValueError(f"variable {name}: declared {arity} values, got {len(vs)}")
        values[name] = vs
        order.append(name)

    tables = {}
    for head, body in PROBABILITY.findall(text):
        child, _, rest = head.partition("|")
        child = child.strip()
        parents = split_list(rest)
        if child not in values:
            raise ValueError(f"probability block for unknown variable {child}")
        rows = {}
        table = TABLE.search(body)
        if table:
            if parents:
                raise ValueError(f"{child}: table form with parents is not supported")
            rows[()] = numbers(table.group(1))
        for key, probs in ROW.findall(body):
            rows[tuple(split_list(key))] = numbers(probs)
        cpt = []
        for config in itertools.product(*(values[p] for p in parents)):
            if config not in rows:
                raise ValueError(f"{child}: no row for {config}")
            row = rows[config]
            if len(row) != len(values[child]):
                raise ValueError(f"{child}: row {config} has the wrong length")
            cpt.append(row)
        tables[child] = (parents, cpt)

    out = []
    for name in order:
        if name not in tables:
            raise ValueError(f"variable {name} has no probability block")
        parents, cpt = tables[name]
        out.append({"name": name, "values": values[name], "parents": parents,
                    "cpt": cpt})
    return {"variables": out, "uncertainty": {"theta": theta}}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("bif")
    ap.add_argument("-o", "--output", help="write here instead of stdout")
    ap.add_argument("--theta", type=float, default=10.0,
                    help="variance p(1-p)/theta for every parameter (default 10)")
    args = ap.parse_args(argv)
    with open(args.bif, encoding="utf-8") as f:
        doc = convert(f.read(), args.theta)
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    try:
        main()
    except ValueError as e:
        sys.exit(f"bif2json: {e}")
