"""Quick end-to-end check of the Python bindings.

Build and install the extension first:

    pip install maturin
    maturin develop --release -m crates/py/Cargo.toml

then run `python python/smoke_test.py`.
"""

import math

import wirefish


def main() -> None:
    cfg = wirefish.Config.shipped()
    print(cfg)

    k = wirefish.strip_stiffness(0.02, 0.025, 0.4e-3, 197e9)
    assert abs(k - 1.3133) < 1e-3, k

    point = cfg.with_frequency(4.0).with_pes_stiffness(1.31)
    run = wirefish.simulate(point, k1=0.15)
    summary, trace = run["summary"], run["trace"]
    n = summary["steps_per_cycle"] * summary["cycles"]
    assert all(len(v) == n for v in trace.values())
    assert all(e >= 0.0 for e in trace["e_aes"])
    assert math.isclose(max(trace["e_aes"]), summary["peak_aes_energy"])
    print(f"4 Hz: mean power {summary['mean_motor_power']:.3f} W, "
          f"fin amplitude {summary['amplitude_theta2']:.3f} rad")

    # Mean motor power does not depend on the AES stiffness.
    other = wirefish.simulate(point, k1=2.0)["summary"]
    assert math.isclose(other["mean_motor_power"], summary["mean_motor_power"], rel_tol=1e-9)

    bounds = wirefish.stiffness_bounds(point)
    best = wirefish.optimize(point)
    assert bounds["k1_min"] <= best["k1_opt"] <= bounds["k1_max"]
    assert best["variance"] >= 0.0 and "eta_r" in best
    print(f"optimum k1 = {best['k1_opt']:.3f} N*m, variance reduced by {best['eta_r']:.1f} %")

    rows = wirefish.sweep(cfg, [3.0, 5.0], pes_thickness_mm=[0.4, 0.8], jobs=1)
    assert len(rows) == 4 and all("result" in r for r in rows)

    try:
        wirefish.optimize(point, mode="annealing")
    except ValueError:
        pass
    else:
        raise AssertionError("bad mode accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
