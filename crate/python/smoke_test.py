#!/usr/bin/env python3
"""Smoke test for the freeact_py extension module.

Build the extension first, then run this script:

    cargo build -p freeact-py
    python3 python/smoke_test.py

The script locates the built cdylib in target/, exposes it as an importable
module, and exercises the oracle, builder, persistence, and spectra surfaces.
"""

import math
import shutil
import sys
import sysconfig
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    for profile in ("debug", "release"):
        built = ROOT / "target" / profile / "libfreeact_py.so"
        if built.exists():
            staging = ROOT / "target" / "pyext"
            staging.mkdir(parents=True, exist_ok=True)
            target = staging / f"freeact_py{suffix}"
            if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
                shutil.copy2(built, target)
            sys.path.insert(0, str(staging))
            import freeact_py

            return freeact_py
    raise SystemExit("build the extension first: cargo build -p freeact-py")


def main():
    fa = load_module()

    # constants
    assert math.isclose(fa.KESTEN_NORM_F2, 2 * math.sqrt(3), rel_tol=0, abs_tol=1e-12)
    assert math.isclose(
        fa.DISPLACEMENT_SUM_BOUND, 4 - 2 * math.sqrt(3), rel_tol=0, abs_tol=1e-12
    )
    assert math.isclose(
        fa.DISPLACEMENT_MAX_BOUND, math.sqrt(2 - math.sqrt(3)), rel_tol=0, abs_tol=1e-12
    )

    # oracle windows and orbit counts
    oracle = fa.Oracle("randomgraph", 42)
    oracle.grow_to_level(3)
    assert oracle.size() >= 30
    classes, injective = oracle.orbit_counts(2, 3, 30)
    assert injective == 2, injective  # edge / non-edge
    classes3, injective3 = oracle.orbit_counts(3, 3, 30)
    assert injective3 == 8, injective3  # all graphs on 3 labelled vertices

    dlo = fa.Oracle("dlo", 0)
    assert dlo.window(3) == [0, 1, 2]

    # build a free pair, certify, round-trip through FREEPAIR/1 text
    pair = fa.build_pair("pureset", 7, 8, 3, 4)
    evaluations, violations = pair.check_fixed_points(4)
    assert evaluations > 0 and violations == 0, (evaluations, violations)
    base = pair.phi_pairs()[0][0]
    assert pair.schreier_ball_size(base, 3) == 2 * 3**3 - 1

    text = pair.to_text()
    assert text.startswith("FREEPAIR/1")
    reloaded = fa.FreePair.parse(text)
    assert reloaded.phi_pairs() == pair.phi_pairs()
    assert reloaded.gamma_pairs() == pair.gamma_pairs()
    _, violations2 = reloaded.check_fixed_points(pair.cert_depth())
    assert violations2 == 0

    # spectra: two independent eigenvalue computations agree, and the
    # Kesten table increases toward (but stays below) 2*sqrt(3)
    lam2 = fa.cayley_top_eigenvalue(2, 1e-11)
    assert math.isclose(lam2, math.sqrt(7), abs_tol=1e-9), lam2
    assert math.isclose(lam2, fa.radial_top_eigenvalue(2), abs_tol=1e-9)
    rows = fa.kesten_table(6, 1e-10)
    lambdas = [lam for _, lam, _ in rows]
    assert lambdas == sorted(lambdas)
    assert all(lam < fa.KESTEN_NORM_F2 for lam in lambdas)

    worst_sum, sum_bound, min_max_form, max_form_bound, passed = fa.displacement(4, 200)
    assert passed
    assert worst_sum >= sum_bound - 1e-9
    assert min_max_form >= max_form_bound - 1e-9

    print("freeact_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
