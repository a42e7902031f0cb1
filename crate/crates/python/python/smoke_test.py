"""Smoke test for the compiled extension: import it and run each entry point once."""

import json
import math

import pcf_surgery_py as pcf


def main():
    tip = pcf.Misiurewicz(2, 1, "-1.9")
    assert abs(tip.c + 2) < 1e-15 and abs(tip.mu - 4) < 1e-15
    assert abs(tip.nu + 8 / 3) < 1e-12
    re, _ = tip.decimal("c")
    assert re.startswith("-2")
    again = pcf.Misiurewicz.from_json(tip.to_json())
    assert again.c == tip.c

    ear = pcf.Misiurewicz(2, 2, "0.1+1.1i", precision_bits=256)
    assert abs(ear.nu - complex(0.8, 1.6)) < 1e-12

    orbit = pcf.backward_orbit(pcf.Misiurewicz(2, 1, "-1.9", precision_bits=192), 20)
    # 4^20 (q_20 - 2), formed before rounding to double
    assert abs(orbit.scaled[20] + math.pi**2 / 4) < 1e-8

    x, err = pcf.backward_orbit(ear, 60).limit_x()
    assert abs(x - complex(-0.6366841475, -0.5250350193)) < 1e-9 and err < 1e-12

    rows = pcf.skinning_table(3, 9)
    assert abs(rows[0][1] + 1.32472) < 5e-6 and abs(rows[-1][1] + 1.41419) < 5e-6
    limit, _, _ = pcf.skinning_limit()
    assert abs(limit - 3 * math.sqrt(2) / 8 * math.pi**2) < 5e-3

    seq = pcf.surgery_sequence(pcf.Misiurewicz(2, 1, "-1.9", precision_bits=224), 2, 8)
    assert abs(seq.x_estimate.real - 3 * math.pi**2 / 32) < 1e-3
    assert seq.postcritical_counts(64) == [n + 2 for n in range(2, 9)]
    assert seq.to_csv().startswith("n,re_c,im_c")
    assert json.loads(seq.to_json())["entries"]

    assert pcf.hausdorff([(0, 0)], [(0, 0), (1, 0)]) == 1.0
    assert abs(abs(pcf.reduce_to_annulus((0.1, 0), (4, 0))) - 1.6) < 1e-12

    report = pcf.tan_lei_report(tip, n_to=4, samples=4000, h=0.05)
    assert report["cross"] >= 0 and len(report["julia_self"]) == 3

    try:
        pcf.Misiurewicz(0, 1, "-1.9")
    except pcf.NumericError as e:
        assert str(e).startswith("InvalidArgument")
    else:
        raise AssertionError("expected NumericError")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
