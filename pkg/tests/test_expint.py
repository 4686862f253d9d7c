import mpmath
import numpy as np
from hypothesis import given, strategies as st

from retarded_qed.expint import expint_n


def test_against_mpmath(rng):
    r = 10.0 ** rng.uniform(-3, 2.5, 300)
    ang = rng.uniform(-np.pi * 0.999, np.pi * 0.999, 300)
    z = r * np.exp(1j * ang)
    for n in (1, 2, 3, 7, 20, 45):
        got = expint_n(n, z)
        ref = np.array([complex(mpmath.expint(n, complex(x))) for x in z])
        assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-12


@given(st.floats(0.05, 30), st.floats(-3.0, 3.0), st.integers(1, 12))
def test_recurrence(r, ang, n):
    # n E_{n+1}(z) = e^{-z} - z E_n(z)
    z = np.array([r * np.exp(1j * ang)])
    lhs = n * expint_n(n + 1, z)
    rhs = np.exp(-z) - z * expint_n(n, z)
    assert abs(lhs - rhs)[0] <= 1e-12 * max(1.0, abs(np.exp(-z[0])), abs(z[0] * expint_n(n, z)[0]))
