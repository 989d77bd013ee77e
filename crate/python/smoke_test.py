"""Smoke test for the `finsler` extension module.

Build the module first (see README), then run:

    python3 python/smoke_test.py [path/to/dir/containing/finsler.so]
"""

import math
import sys

if len(sys.argv) > 1:
    sys.path.insert(0, sys.argv[1])

import finsler


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    torus = finsler.Metric.berwald_torus(2.0)
    close(torus.F([0.1, 0.2], [1.0, 0.0]), 1.5, 1e-14)
    close(torus.F([0.1, 0.2], [-1.0, 0.0]), 0.5, 1e-14)
    close(torus.volume("ht"), 4 * math.pi**2, 0.01 * 4 * math.pi**2)

    sphere = finsler.Metric.from_config('{"kind": "sphere"}')
    k = sphere.flag_curvature([0.1, -0.2], [1.0, 0.3], [0.2, 1.0])
    close(k, 1.0, 1e-5)
    v = sphere.exp_inverse([0.0, 0.0], sphere.exp_map([0.0, 0.0], [0.3, 0.1]))
    close(v[0], 0.3, 1e-9)
    close(v[1], 0.1, 1e-9)

    plane = finsler.Metric.euclidean(2)
    c = plane.center_of_mass([[0.0, 0.0], [2.0, 0.0]], [0.5, 0.5], [0.3, 0.4])
    close(c["point"][0], 1.0, 1e-10)
    close(c["point"][1], 0.0, 1e-10)

    rep = finsler.thm1_1_injectivity_bound(2, 1.0, 0.0, 1.0, math.pi, 4 * math.pi**2)
    close(rep["value"], 0.8546, 1e-3)
    close(finsler.remark4_3_v(1.0, 1.0), math.pi / 4, 1e-12)
    assert finsler.t_frak(1.0, 2.0) < finsler.t_frak(1.0, 1.0)

    suite = sphere.verify('{"suite": "appendixA", "k_used": 1.0, "Lambda_used": 1.0, '
                          '"settings": {"samples": 5, "seed": 7}}')
    assert suite["total_violations"] == 0, suite

    try:
        finsler.Metric.from_config('{"kind": "sphere", "bogus": 1}')
    except ValueError:
        pass
    else:
        raise AssertionError("unknown config key accepted")

    print("finsler python smoke test: OK")


if __name__ == "__main__":
    main()
