"""Smoke test for the `sumrate` extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import json
import math

import sumrate


def main():
    assert abs(sumrate.spectral_radius([[2.0, 1.0], [1.0, 2.0]]) - 3.0) < 1e-12
    radius, right, left = sumrate.perron_pair([[1.0, 2.0], [3.0, 4.0]])
    assert abs(radius - (5 + math.sqrt(33)) / 2) < 1e-10
    assert abs(max(right) - 1.0) < 1e-15
    assert abs(sum(a * b for a, b in zip(left, right)) - 1.0) < 1e-12
    assert sumrate.is_inverse_z([[2.0, 1.0], [1.0, 2.0]])
    assert not sumrate.is_inverse_z([[1.0, 2.0], [2.0, 1.0]])

    scalar = sumrate.Problem([[1.0]], [1.0], [1.0], 1.0)
    trace = scalar.solve_rate()
    assert len(trace) == 2000
    assert abs(trace.solution_objective - math.log(1.5)) < 1e-3

    problem = sumrate.Problem.generate(8)
    assert problem.n == 3
    again = sumrate.Problem.from_json(problem.to_json())
    assert again.M == problem.M
    assert json.loads(problem.to_json())["p_max"] == problem.p_max

    rate = problem.solve_rate()
    sinr = problem.solve_sinr()
    assert all(x > 0 for it in rate.iterates for x in it)
    assert abs(rate.solution_objective - sinr.solution_objective) < 1e-2
    assert problem.h_rate(rate.solution) <= 1 + 1e-9

    power = problem.recover(rate.solution)
    assert abs(power["weighted_sum_rate"] - rate.solution_objective) < 1e-4
    assert max(power["p_star"]) <= problem.p_max * (1 + 1e-9)

    for init in ("full", "alt"):
        w = problem.wmmse(init)
        objs = w.objectives
        assert all(b >= a - 1e-10 for a, b in zip(objs, objs[1:]))
        assert w.solution_objective <= rate.solution_objective + 1e-3

    csv = rate.to_csv().splitlines()
    assert csv[0] == "iter,objective,gamma,feasible,active_l,r_1,r_2,r_3"
    assert len(csv) == 2001

    try:
        sumrate.Problem([[0.0]], [1.0], [1.0], 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("non-positive M accepted")

    print("smoke test passed:", repr(problem), repr(rate))


if __name__ == "__main__":
    main()
