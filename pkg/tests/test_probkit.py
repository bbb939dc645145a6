import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from deniakit import probkit
from deniakit.exceptions import (
    InformationConsistencyError,
    InvalidDistributionError,
    ShapeMismatchError,
)
from deniakit.probkit import (
    INFINITE,
    JointPmf,
    Pmf,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    kl_divergence,
    l1_distance,
    mutual_information,
    ternary_entropy,
    uniform,
)


def pmfs(size):
    weights = st.lists(st.floats(0.01, 1.0), min_size=size, max_size=size)
    return weights.map(lambda w: np.asarray(w) / np.sum(w))


def joints(shape):
    count = math.prod(shape)
    weights = st.lists(st.floats(0.0, 1.0), min_size=count, max_size=count).filter(
        lambda w: sum(w) > 0.1
    )
    return weights.map(lambda w: (np.asarray(w) / np.sum(w)).reshape(shape))


class PmfTests(SimpleTestCase):
    def test_rejects_bad_sum(self):
        with self.assertRaises(InvalidDistributionError):
            Pmf([0.5, 0.6])

    def test_rejects_negative_entry(self):
        with self.assertRaises(InvalidDistributionError):
            Pmf([1.1, -0.1])

    def test_clamps_rounding_noise(self):
        p = Pmf([1.0, -1e-16])
        self.assertEqual(p.probs[1], 0.0)

    def test_joint_needs_two_or_three_axes(self):
        with self.assertRaises(ShapeMismatchError):
            JointPmf([0.5, 0.5])

    def test_marginal_order(self):
        j = JointPmf(np.array([[0.1, 0.2], [0.3, 0.4]]))
        np.testing.assert_allclose(j.marginal(1, 0).probs, [[0.1, 0.3], [0.2, 0.4]])
        np.testing.assert_allclose(j.marginal(0).probs, [0.3, 0.7])


class MeasureTests(SimpleTestCase):
    def test_uniform_entropy(self):
        self.assertAlmostEqual(entropy(uniform(4)), 2.0, places=12)

    def test_named_entropies(self):
        self.assertAlmostEqual(binary_entropy(0.5), 1.0, places=12)
        self.assertAlmostEqual(ternary_entropy(1 / 3, 1 / 3, 1 / 3), math.log2(3), places=12)
        self.assertEqual(binary_entropy(0.0), 0.0)

    def test_kl_support_violation_is_infinite(self):
        self.assertEqual(kl_divergence([0.5, 0.5], [1.0, 0.0]), INFINITE)
        self.assertTrue(probkit.is_infinite(kl_divergence([0.5, 0.5], [1.0, 0.0])))

    def test_kl_zero_mass_terms_vanish(self):
        self.assertAlmostEqual(kl_divergence([1.0, 0.0], [0.5, 0.5]), 1.0, places=12)

    def test_mutual_information_of_copy(self):
        j = np.diag([0.25, 0.25, 0.5])
        self.assertAlmostEqual(mutual_information(j), 1.5, places=12)

    def test_conditional_entropy(self):
        # A uniform on 2 bits, B its first bit
        j = np.array([[0.25, 0.0], [0.25, 0.0], [0.0, 0.25], [0.0, 0.25]])
        self.assertAlmostEqual(conditional_entropy(j), 1.0, places=12)

    def test_shape_checks(self):
        with self.assertRaises(ShapeMismatchError):
            mutual_information(np.full((2, 2, 2), 0.125))
        with self.assertRaises(ShapeMismatchError):
            kl_divergence([0.5, 0.5], [1 / 3, 1 / 3, 1 / 3])

    def test_large_negative_raises(self):
        with self.assertRaises(InformationConsistencyError):
            probkit._clamp(-1e-6, "entropy")
        self.assertEqual(probkit._clamp(-1e-13, "entropy"), 0.0)


class MeasurePropertyTests(SimpleTestCase):
    @settings(max_examples=60, deadline=None)
    @given(pmfs(4), pmfs(4))
    def test_pinsker(self, p, q):
        kl = kl_divergence(p, q)
        self.assertLessEqual(l1_distance(p, q), math.sqrt(2.0 * math.log(2.0) * kl) + 1e-9)

    @settings(max_examples=60, deadline=None)
    @given(pmfs(3), pmfs(3), joints((3, 2)))
    def test_data_processing(self, p, q, kernel):
        rows = kernel + 1e-3
        rows = rows / rows.sum(axis=1, keepdims=True)
        self.assertLessEqual(kl_divergence(p @ rows, q @ rows), kl_divergence(p, q) + 1e-10)

    @settings(max_examples=60, deadline=None)
    @given(joints((2, 3, 2)))
    def test_chain_rule(self, j):
        # I(A; B,C) = I(A;C) + I(A;B|C)
        whole = mutual_information(j.reshape(2, 6))
        parts = mutual_information(j.sum(axis=1)) + conditional_mutual_information(j)
        self.assertAlmostEqual(whole, parts, places=9)

    @settings(max_examples=60, deadline=None)
    @given(joints((3, 3)))
    def test_mutual_information_bounds(self, j):
        mi = mutual_information(j)
        self.assertGreaterEqual(mi, 0.0)
        self.assertLessEqual(mi, min(entropy(j.sum(axis=1)), entropy(j.sum(axis=0))) + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(pmfs(5))
    def test_entropy_range(self, p):
        h = entropy(p)
        self.assertGreaterEqual(h, 0.0)
        self.assertLessEqual(h, math.log2(5))
