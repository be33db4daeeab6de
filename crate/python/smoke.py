#!/usr/bin/env python3
"""Smoke test for the abring_py extension module.

Builds nothing itself: run `cargo build -p abring-py` (or --release) first.
The script locates the compiled cdylib under target/, copies it next to a
temporary directory under the importable name, and exercises the bindings
against known reference values.
"""

import math
import pathlib
import shutil
import sys
import tempfile

REPO = pathlib.Path(__file__).resolve().parent.parent


def locate_cdylib() -> pathlib.Path:
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libabring_py.so", "abring_py.so", "libabring_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("abring_py cdylib not found; run `cargo build -p abring-py` first")


def main() -> None:
    cdylib = locate_cdylib()
    staging = tempfile.mkdtemp(prefix="abring-py-")
    shutil.copy2(cdylib, pathlib.Path(staging) / "abring_py.so")
    sys.path.insert(0, staging)

    import abring_py as ab

    checks = 0

    def check(label, ok):
        nonlocal checks
        checks += 1
        status = "ok" if ok else "FAIL"
        print(f"  [{status}] {label}")
        if not ok:
            sys.exit(1)

    # Saturated delay time: k = 1, kappa = 2 gives 5/17.
    tau_s = ab.tau_saturated(1.0, 5.0)
    check("tau_saturated(1, 5) == 5/17", abs(tau_s - 5.0 / 17.0) < 1e-12)

    # Unitarity and delay of an opaque single-barrier ring.
    spec = ab.RingSpec.single_barrier(1.0, 5.0, 30.0)
    r = ab.reflection(spec)
    check("|R| == 1", abs(abs(r) - 1.0) < 1e-10)
    tau, step, err = ab.phase_time(spec)
    check("phase_time -> tau_s", abs(tau - tau_s) < 1e-5)
    check("error estimate sane", err >= 0.0 and step > 0.0)
    check("residual tiny", ab.residual(spec) < 1e-10)

    # Numerical solver against the closed form at finite length and flux.
    probe = ab.RingSpec.single_barrier(1.0, 5.0, 3.0, 0.7)
    closed = ab.reflection_closed_form(1.0, 5.0, 3.0, 0.7)
    check("closed form matches solver", abs(ab.reflection(probe) - closed) < 1e-10)
    check(
        "closed-form delay matches",
        abs(ab.tau_closed_form(1.0, 5.0, 30.0) - tau_s) < 1e-8,
    )

    # Flux periodicity of the delay time (period of one flux quantum).
    base = ab.RingSpec.single_barrier(1.0, 5.0, 6.0)
    rows, visibility = ab.scan_flux(base, 0.0, 2.0, 41)
    drift = max(abs(rows[i][1] - rows[i + 20][1]) for i in range(20))
    check("flux period == 1", drift < 1e-8)
    check("visibility finite", 0.0 <= visibility < 1.0)

    # Well resonances: two peaks about pi/k apart.
    two = ab.RingSpec(1.0, v1=2.0, v3=2.0, lb1=2.75, lb3=5.0, well=1.0)
    _, peaks = ab.scan_resonance(two, 1.0, 5.2, 1051)
    check("two resonances found", len(peaks) >= 2)
    spacing = peaks[1][0] - peaks[0][0]
    check("resonance spacing == pi/k", abs(spacing - math.pi) < 0.05)

    # Invalid input surfaces as ValueError.
    try:
        ab.RingSpec(-1.0)
    except ValueError:
        check("negative energy rejected", True)
    else:
        check("negative energy rejected", False)

    print(f"smoke OK ({checks} checks)")


if __name__ == "__main__":
    main()
