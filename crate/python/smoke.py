"""Smoke test for the cuspsym_py extension.

Build first with
    cargo build --release -p cuspsym-py --features extension-module
then run
    python3 python/smoke.py
"""

import importlib.util
import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for name in ("libcuspsym_py.so", "libcuspsym_py.dylib", "cuspsym_py.dll"):
        lib = ROOT / "target" / "release" / name
        if lib.exists():
            break
    else:
        sys.exit("extension not built; see the module docstring")
    ext = ".pyd" if lib.suffix == ".dll" else ".so"
    dest = pathlib.Path(tempfile.mkdtemp()) / ("cuspsym_py" + ext)
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("cuspsym_py", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    m = load()

    e4 = json.loads(m.eisenstein(1, 4, prec=4))
    print("eisenstein(1, 4):", e4)

    mu = json.loads(m.mu("1/5,0,1/5,0 mod 1", degree=2, prec=6))
    assert mu["series"]["level"] == 5

    man = json.loads(m.verify_manin("1/5,2/5,1/5,4/5 mod 1", 5, degree=3))
    assert man["pass"], man

    ids = json.loads(m.verify_identities(nmax=100))
    assert ids["master_convolution"]["pass"]
    assert ids["divisor_sums"][0]["stated_pass"]

    bg = json.loads(m.bg_table(5, 4))
    assert bg["cusp_rank"] == 1

    try:
        m.mu("not an open", 2, 4)
    except ValueError as exc:
        print("bad input rejected:", exc)
    else:
        raise AssertionError("expected ValueError")

    print("smoke OK")


if __name__ == "__main__":
    main()
