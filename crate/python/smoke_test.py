"""Smoke test for the pydmp extension module.

Build and install the module first, e.g.

    pip install maturin
    pip install ./crates/py --no-build-isolation

then run `python python/smoke_test.py`.
"""

import math

import pydmp


def main():
    d = pydmp.SpdTensor(500.5, 499.5, 500.5)
    assert abs(d.det() - 1000.0) < 1e-9
    hi, lo = d.eigenvalues()
    assert abs(lo - 1.0) < 1e-9 and abs(hi - 1000.0) < 1e-9
    assert abs(pydmp.SpdTensor(1.0, 0.0, 1.0).metric_angle((1, 0), (0, 1)) - math.pi / 2) < 1e-12

    try:
        pydmp.SpdTensor(1.0, 2.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("indefinite tensor accepted")

    ne = pydmp.Mesh.grid("ne", 16)
    nw = pydmp.Mesh.grid("nw", 16)
    assert ne.num_triangles == 512 and ne.num_vertices == 289

    r = pydmp.audit(ne, benchmark=True)
    assert r["violations_delaunay_type"] == 0
    assert r["m_matrix_verdict"] is True
    assert r["overshoot"] <= 1e-10 and r["undershoot"] <= 1e-10
    assert abs(r["max_pair_sum_over_pi"] - 0.979875) < 1e-4

    r = pydmp.audit(nw, tensor=d)
    assert r["violations_delaunay_type"] > 0 and r["overshoot"] is None
    assert abs(r["max_metric_angle_over_pi"] - 0.979875) < 1e-4

    fourway = pydmp.Mesh.grid("fourway", 16, fraction=0.75)
    r = pydmp.audit(fourway, benchmark=True)
    assert r["violations_nonobtuse"] > 0 and r["violations_delaunay_type"] == 0
    assert len(pydmp.obtuse_angles(fourway, benchmark=True)) == r["violations_nonobtuse"]

    sol = pydmp.solve_benchmark(nw)
    assert sol.overshoot > 1e-3 and sol.undershoot > 1e-3
    csv = sol.to_csv().splitlines()
    assert csv[0] == "x,y,u,is_boundary" and len(csv) == nw.num_vertices + 1
    lines = sol.contours([0.25, 0.5, 0.75, 5.0])
    assert [c for c, _ in lines] == [0.25, 0.5, 0.75]
    assert sol.contours_svg([0.5]).startswith("<svg")

    try:
        pydmp.solve_benchmark(nw, max_iter=1)
    except pydmp.ConvergenceError:
        pass
    else:
        raise AssertionError("iteration cap ignored")

    swapped, before, after, flips = pydmp.swap(nw, benchmark=True)
    assert after < before and flips > 0
    assert pydmp.audit(swapped, benchmark=True)["violations_delaunay_type"] == after

    text = nw.to_text()
    assert pydmp.Mesh.from_text(text).vertices == nw.vertices

    dl = pydmp.Mesh.delaunay(8, seed=3)
    assert pydmp.audit(dl, tensor=pydmp.SpdTensor(1, 0, 1))["violations_delaunay_type"] == 0

    names = [n for n, _ in pydmp.fields()]
    assert "rotating" in names
    assert pydmp.field_at("rotating", 12.0, 8.0).d22 > 999.0
    pydmp.audit(ne, field="rotating")

    s = pydmp.sweep("ne", [4, 8, 12, 16])
    assert s["dmp_satisfied"] and s["overshoot_exponent"] is None and len(s["rows"]) == 4

    reg = pydmp.region(1.0, 32)
    assert reg.column_heights() == [32 - i for i in range(32)]
    assert pydmp.region(100.0, 32).to_svg().startswith("<svg")

    print("pydmp smoke test passed")


if __name__ == "__main__":
    main()
