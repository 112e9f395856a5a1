import numpy as np
import pytest

import qvikit as qk


@pytest.fixture(scope="session")
def ex1():
    return qk.get_builtin("example1")


@pytest.fixture(scope="session")
def ex2():
    return qk.get_builtin("example2")


@pytest.fixture(scope="session")
def ex3():
    return qk.get_builtin("example3")


@pytest.fixture(scope="session")
def ex4():
    return qk.get_builtin("example4")


@pytest.fixture(scope="session")
def r5():
    return qk.get_builtin("remark5")


def _tight(problem, x0, h):
    report = qk.solve_alg1(problem, x0, qk.SolverConfig(h=h, tol=1e-12, max_iter=200_000))
    assert report.converged
    return report.x_final


@pytest.fixture(scope="session")
def ex1_solution(ex1):
    return _tight(ex1, [6.0, 2.0], 0.01)


@pytest.fixture(scope="session")
def ex2_solution(ex2):
    return _tight(ex2, [43.0, 22.0, 55.0], 0.3)


@pytest.fixture(scope="session")
def ex3_solution(ex3):
    return _tight(ex3, [5.0, 4.0, 2.0], 0.3)


@pytest.fixture(scope="session")
def r5_solution(r5):
    return _tight(r5, [0.0], 0.5)


@pytest.fixture(scope="session")
def ex4_solution(ex4):
    report = qk.solve_zero(ex4.f, ex4.w, [1e4, 2e4, 3e4],
                           qk.SolverConfig(h=1.0, tol=1e-13, max_iter=100))
    assert report.converged
    return report.x_final
