import numpy as np
import pytest

from boostdyn.polyroots import all_roots, pair_conjugates


def sorted_roots(roots):
    return sorted(roots, key=lambda z: (round(z.real, 9), round(z.imag, 9)))


class TestAllRoots:
    def test_known_real_quartic(self):
        # (s+1)(s+2)(s+3)(s+4)
        coeffs = np.poly([-1.0, -2.0, -3.0, -4.0])
        roots = sorted_roots(all_roots(coeffs))
        assert np.allclose(roots, [-4.0, -3.0, -2.0, -1.0], atol=1e-10)

    def test_conjugate_pair_quartic(self):
        true = [-10.0 + 40.0j, -10.0 - 40.0j, -3.0, -70.0]
        coeffs = np.poly(true)
        roots = sorted_roots(all_roots(coeffs))
        assert np.allclose(roots, sorted_roots(np.array(true)), atol=1e-8)

    def test_non_monic_scaling(self):
        coeffs = 3.7e-9 * np.poly([-100.0, -2000.0, -5.0 + 12.0j, -5.0 - 12.0j])
        roots = all_roots(coeffs)
        assert np.allclose(
            sorted_roots(roots),
            sorted_roots(np.array([-2000.0, -100.0, -5.0 - 12.0j, -5.0 + 12.0j])),
            rtol=1e-8,
        )

    def test_agrees_with_numpy_on_random_quartics(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            true = [
                complex(-rng.uniform(1, 1e4), rng.uniform(0, 1e4)),
                0.0,
                -rng.uniform(1, 1e4),
                -rng.uniform(1, 1e4),
            ]
            true[1] = np.conj(true[0])
            coeffs = np.poly(true)
            ours = sorted_roots(all_roots(coeffs))
            ref = sorted_roots(np.roots(coeffs))
            assert np.allclose(ours, ref, rtol=1e-7, atol=1e-7)

    def test_degree_one(self):
        assert all_roots([2.0, -6.0])[0] == pytest.approx(3.0)

    def test_rejects_zero_leading_coefficient(self):
        with pytest.raises(ValueError):
            all_roots([0.0, 1.0, 2.0])


class TestPairConjugates:
    def test_snaps_noisy_pair(self):
        noisy = np.array([-10.0 + 40.000001j, -10.000001 - 39.999999j, -3.0 + 1e-12j, -70.0])
        fixed = pair_conjugates(noisy, tol=1e-6)
        assert fixed[2].imag == 0.0
        assert fixed[0] == np.conj(fixed[1])

    def test_leaves_real_roots_alone(self):
        roots = np.array([-1.0 + 0.0j, -2.0 + 0.0j])
        assert np.allclose(pair_conjugates(roots), roots)
