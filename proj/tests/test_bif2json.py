"""Round trip: BIF -> JSON -> wmcvar bn, against the embedded sprinkler demo."""

import json
import os
import subprocess
import sys
import tempfile

tool, converter, data = sys.argv[1:4]


def bn(*args):
    out = subprocess.run([tool, "--no-timings", "bn", *args], check=True,
                         capture_output=True, text=True).stdout
    return json.loads(out)


with tempfile.TemporaryDirectory() as d:
    net = os.path.join(d, "sprinkler.json")
    ev = os.path.join(d, "evidence.json")
    subprocess.run([sys.executable, converter, os.path.join(data, "sprinkler.bif"),
                    "--theta", "20", "-o", net], check=True)
    with open(ev, "w") as f:
        json.dump({"WetGrass": "wet"}, f)
    got = bn(net, ev, "--sweep")
    want = bn("--demo", "sprinkler", ev, "--sweep")
    for key in ("mean", "variance", "sweep"):
        assert got[key] == want[key], (key, got[key], want[key])

    bad = os.path.join(d, "bad.bif")
    with open(bad, "w") as f:
        f.write("variable A { type discrete [ 2 ] { x, y }; }\n")
    r = subprocess.run([sys.executable, converter, bad], capture_output=True, text=True)
    assert r.returncode != 0 and "no probability block" in r.stderr, r.stderr

print("ok")
