#!/usr/bin/env python3
"""Fetch the UCI Ionosphere data set and write data/ionosphere.csv.

Columns a1..a34 then `class` (good -> 1, bad -> 2). Tries the UCI archive
first and falls back to the copy shipped in the Orange3 wheel's test
fixtures (needs `pip download`).
"""
import hashlib
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases/ionosphere/ionosphere.data"
SHA256 = "0994b55f48687a81d3168133d3d0c86355eb514d71bbef8b95f480eab150f669"
OUT = Path(__file__).resolve().parent.parent / "data" / "ionosphere.csv"
CLASS = {"g": "1", "b": "2"}


def from_uci():
    with urllib.request.urlopen(UCI, timeout=30) as r:
        text = r.read().decode()
    return [line.split(",") for line in text.splitlines() if line.strip()]


def from_orange():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp, "Orange3"],
            check=True, stdout=subprocess.DEVNULL,
        )
        wheel = next(Path(tmp).glob("*.whl"))
        with zipfile.ZipFile(wheel) as z:
            name = next(n for n in z.namelist() if n.endswith("datasets/ionosphere.tab"))
            text = z.read(name).decode()
    # three header lines: names, types, flags
    return [line.split("\t") for line in text.splitlines()[3:] if line.strip()]


def main():
    try:
        rows = from_uci()
    except Exception as e:  # network trouble: use the mirrored copy
        print(f"UCI download failed ({e}); using the Orange3 copy", file=sys.stderr)
        rows = from_orange()
    buf = io.StringIO()
    buf.write(",".join([f"a{i}" for i in range(1, 35)] + ["class"]) + "\n")
    for r in rows:
        assert len(r) == 35, r
        buf.write(",".join(v.strip() for v in r[:34]) + "," + CLASS[r[34].strip()] + "\n")
    data = buf.getvalue().encode()
    digest = hashlib.sha256(data).hexdigest()
    if digest != SHA256:
        print(f"warning: sha256 {digest} differs from the expected {SHA256}", file=sys.stderr)
    OUT.parent.mkdir(exist_ok=True)
    OUT.write_bytes(data)
    print(f"wrote {OUT} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
