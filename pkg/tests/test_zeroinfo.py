import numpy as np
from django.test import SimpleTestCase

from deniakit.channel import Dmc
from deniakit.exceptions import PartitionMismatchError
from deniakit.probkit import Pmf, conditional_mutual_information
from deniakit.zeroinfo import (
    class_sequence,
    collapse,
    refines,
    singleton_partition,
    zero_info_joint,
    zero_info_partition,
)

FIG5_ROWS = [[0.3, 0.7, 0.0], [0.3, 0.7, 0.0], [0.0, 0.4, 0.6]]


def fig5_channel():
    return Dmc(FIG5_ROWS, ("w1", "w2", "w3"), ("z1", "z2", "z3"))


class PartitionTests(SimpleTestCase):
    def test_shared_rows_form_a_class(self):
        part = zero_info_partition(fig5_channel())
        self.assertEqual(part.classes, ((0, 1), (2,)))
        self.assertEqual(part.class_of, (0, 0, 1))
        self.assertEqual(part.names(fig5_channel().in_names), ["{w1,w2}", "{w3}"])

    def test_identity_gives_singletons(self):
        part = zero_info_partition(Dmc(np.eye(4)))
        self.assertEqual(part.classes, ((0,), (1,), (2,), (3,)))

    def test_constant_rows_give_one_class(self):
        part = zero_info_partition(Dmc(np.full((3, 2), 0.5)))
        self.assertEqual(part.classes, ((0, 1, 2),))
        self.assertEqual(part.representative(0), 0)

    def test_tolerance(self):
        rows = [[0.5, 0.5], [0.5 + 1e-11, 0.5 - 1e-11], [0.5 + 1e-6, 0.5 - 1e-6]]
        self.assertEqual(zero_info_partition(Dmc(rows)).size, 2)
        self.assertEqual(zero_info_partition(Dmc(rows), row_tol=1e-5).size, 1)

    def test_collapse_is_idempotent(self):
        d = fig5_channel()
        collapsed = collapse(zero_info_partition(d), d)
        np.testing.assert_allclose(collapsed.rows, [[0.3, 0.7, 0.0], [0.0, 0.4, 0.6]])
        again = zero_info_partition(collapsed)
        self.assertEqual(again.classes, ((0,), (1,)))

    def test_indicator(self):
        np.testing.assert_array_equal(
            zero_info_partition(fig5_channel()).indicator(), [[1, 0], [1, 0], [0, 1]]
        )

    def test_class_sequence_and_refinement(self):
        part = zero_info_partition(fig5_channel())
        np.testing.assert_array_equal(class_sequence(part, [2, 0, 1]), [1, 0, 0])
        self.assertTrue(refines(singleton_partition(3), part))
        self.assertFalse(refines(part, singleton_partition(3)))


class ZeroInfoJointTests(SimpleTestCase):
    def test_class_law_is_shared(self):
        d = fig5_channel()
        joint = zero_info_joint(Pmf([0.2, 0.3, 0.5]), d, zero_info_partition(d)).probs
        p_uz = joint.sum(axis=0)
        np.testing.assert_allclose(p_uz[0] / p_uz[0].sum(), [0.3, 0.7, 0.0], atol=1e-12)

    def test_both_markov_chains(self):
        d = fig5_channel()
        joint = zero_info_joint(Pmf([0.2, 0.3, 0.5]), d, zero_info_partition(d)).probs
        p_wu = joint.sum(axis=2)
        p_uz = joint.sum(axis=0)
        p_u = p_uz.sum(axis=1)
        for w, u in zip(*np.nonzero(p_wu)):
            given_wu = joint[w, u] / p_wu[w, u]
            np.testing.assert_allclose(given_wu, p_uz[u] / p_u[u], atol=1e-10)
            np.testing.assert_allclose(given_wu, d.rows[w], atol=1e-10)

    def test_singleton_partition_leaves_nothing(self):
        d = fig5_channel()
        joint = zero_info_joint(Pmf([0.2, 0.3, 0.5]), d, singleton_partition(3)).probs
        # axes (W, U0, Z) -> I(W;Z|U0) needs (W, Z, U0)
        self.assertAlmostEqual(conditional_mutual_information(joint.transpose(0, 2, 1)), 0.0, places=12)

    def test_mismatch(self):
        d = fig5_channel()
        with self.assertRaises(PartitionMismatchError):
            zero_info_joint(Pmf([0.5, 0.5]), d, zero_info_partition(d))
        with self.assertRaises(PartitionMismatchError):
            zero_info_joint(Pmf([0.2, 0.3, 0.5]), d, zero_info_partition(Dmc(np.full((3, 2), 0.5))))
        with self.assertRaises(PartitionMismatchError):
            collapse(singleton_partition(2), d)


class RefinementPropertyTests(SimpleTestCase):
    def test_refinements_never_increase_conditional_information(self):
        # I(W;V|U) <= I(W;V|U0) for U finer than U0 and V drawn from W
        rng = np.random.default_rng(20240611)
        for _ in range(500):
            w_size = int(rng.integers(2, 6))
            base = rng.dirichlet(np.ones(3), size=3)
            d = Dmc(base[rng.integers(0, 3, size=w_size)])
            part = zero_info_partition(d)

            split = rng.integers(0, 2, size=w_size)
            labels = {}
            finer = np.array([labels.setdefault((part.class_of[w], split[w]), len(labels)) for w in range(w_size)])

            p_w = rng.dirichlet(np.ones(w_size))
            v_given_w = rng.dirichlet(np.ones(3), size=w_size)

            def cmi(class_of, classes):
                law = np.zeros((w_size, 3, classes))
                law[np.arange(w_size), :, class_of] = p_w[:, None] * v_given_w
                return conditional_mutual_information(law)

            coarse = cmi(np.asarray(part.class_of), part.size)
            fine = cmi(finer, len(labels))
            self.assertLessEqual(fine, coarse + 1e-10)
