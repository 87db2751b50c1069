"""Smoke tests for the python bindings, run via ctest with PYTHONPATH set to
the build tree."""

import math

import numpy as np

import stable_lattice as sl

CONFIG = """
{
  "model": {"d": 1, "N": 4,
            "kernel": {"kind": "exp_decay", "beta": 0.5},
            "drift": {"kind": "poly", "eps": 0.5, "c0": 0.0, "n": 0},
            "interaction": "linear"},
  "noise": {"alpha": 1.5, "seed": 42},
  "scheme": {"kind": "exponential", "dt": 0.001, "T": 1.0}
}
"""


def test_sampler():
    x = sl.sample_increments(alpha=1.5, dt=1.0, count=200000, seed=7)
    target = math.exp(-1.0)
    assert abs(sl.empirical_char_fn(x, 1.0) - target) < 4.0 / math.sqrt(len(x))
    y = sl.sample_increments(alpha=1.5, dt=1.0, count=200000, seed=7)
    assert np.array_equal(x, y), "same seed must reproduce bit-for-bit"


def test_noise_path_shape():
    incs = sl.white_noise_path(alpha=1.8, sites=3, dt=0.25, steps=8, seed=5)
    assert incs.shape == (3, 8)
    assert np.isfinite(incs).all()


def test_model_constants():
    m = sl.Model(CONFIG)
    assert abs(m.eta - 1.0 / (math.e - 1.0)) < 1e-12
    assert abs(m.c - 1.5) < 1e-12
    assert abs(m.delta - (1.5 - 1.0 / (math.e - 1.0))) < 1e-12
    assert m.sites == 9


def test_simulate_and_coupling():
    m = sl.Model(CONFIG)
    traj = m.simulate(seed=3)
    assert traj["values"].shape == (1001, 9)
    d = m.coupled_distance(seed=3)
    assert d["distance"][0] > 0
    # contraction: the coupled distance must shrink at least at rate delta
    assert d["distance"][-1] < d["distance"][0] * math.exp(-m.delta * 0.5)


def test_picard():
    m = sl.Model(CONFIG)
    res = m.picard_solve(seed=3)
    assert res["converged"]
    assert res["iterations"] <= 3  # linear drift: fixed point after one pass


def test_kernel_bound():
    m = sl.Model(CONFIG)
    rep = m.verify_kernel_bound(n_max=2, c_values=[0.0, 1.0])
    assert rep["pass"]
    assert rep["max_ratio"] <= 1.0


def test_matrix_power_bound_and_min_b():
    e1 = math.exp(-1.0)
    assert abs(sl.matrix_power_bound(0.0, 0, 1, 0, 0.5) - 1.0 / (1.0 - e1)) < 1e-10
    assert abs(sl.min_B_for_A(0.25, 0.5) - 13.1454) < 1e-3
    assert abs(sl.exp_decay_total_mass(1) - 2.0 / (math.e - 1.0)) < 1e-12


def test_experiment_report():
    m = sl.Model(CONFIG)
    rep = m.run_experiment("contraction", replicas=4, seed=9)
    assert rep["pass"], rep
    assert rep["fitted_rates"]["contraction_slope"]["rate"] < -m.delta * 0.9


def test_config_rejection():
    try:
        sl.Model('{"model": {}}')
    except Exception:
        pass
    else:
        raise AssertionError("invalid config must raise")


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    main()
