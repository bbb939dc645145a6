import json

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from deniakit.channel import (
    BroadcastChannel,
    Dmc,
    Party,
    bec_channel,
    builtin_channel,
    channel_digest,
    degrading_witness,
    dump_channel,
    example2_channel,
    is_physically_degraded,
    is_strongly_typical,
    joint_typicality,
    marginal,
    parse_channel,
    physically_degraded_law,
    resolve_channel,
    sequence_digits,
    sequence_likelihood,
    sequence_likelihoods,
    validate,
)
from deniakit.exceptions import (
    AlphabetError,
    ChannelError,
    ChannelFormatError,
    NotDegradedError,
    ShapeMismatchError,
)
from deniakit.probkit import Pmf


def swapped_channel(p=0.3):
    """Judy sees X noiselessly, Bob through an erasure channel."""
    law = np.zeros((2, 3, 2))
    law[0, 0, 0], law[0, 1, 0] = 1.0 - p, p
    law[1, 2, 1], law[1, 1, 1] = 1.0 - p, p
    return BroadcastChannel(law, ("0", "1"), ("0", "e", "1"), ("0", "1"))


class ChannelFileTests(SimpleTestCase):
    def test_builtin_channels_load(self):
        ch = builtin_channel("example1")
        self.assertEqual(ch.z_names, ("0", "e", "1"))
        self.assertTrue(validate(ch))
        ch = builtin_channel("example2")
        self.assertEqual((ch.x_size, ch.y_size, ch.z_size), (3, 3, 3))

    def test_digest_matches_generated_channel(self):
        self.assertEqual(channel_digest(builtin_channel("example2")), channel_digest(example2_channel()))
        self.assertEqual(len(channel_digest(example2_channel())), 16)

    def test_dump_round_trip(self):
        ch = example2_channel()
        self.assertEqual(channel_digest(parse_channel(dump_channel(ch))), channel_digest(ch))

    def test_malformed_json_reports_position(self):
        with self.assertRaises(ChannelFormatError) as ctx:
            parse_channel('{"x": ["0"],\n "y": [}')
        self.assertEqual(ctx.exception.line, 2)
        self.assertIsNotNone(ctx.exception.column)
        self.assertIn("line 2", str(ctx.exception))

    def test_missing_keys(self):
        with self.assertRaises(ChannelFormatError):
            parse_channel(json.dumps({"x": ["0"], "y": ["0"]}))

    def test_shape_mismatch(self):
        text = json.dumps({"x": ["0", "1"], "y": ["0"], "z": ["0"], "p": [[[1.0]]]})
        with self.assertRaises(ChannelFormatError):
            parse_channel(text)

    def test_bad_symbol_names(self):
        law = [[[1.0, 0.0]], [[0.0, 1.0]]]
        for x_names in (["0", "0"], "01", []):
            text = json.dumps({"x": x_names, "y": ["0"], "z": ["a", "b"], "p": law})
            with self.assertRaises(ChannelFormatError, msg=f"x={x_names!r}"):
                parse_channel(text)

    def test_row_not_summing_to_one(self):
        text = json.dumps({"x": ["0", "1"], "y": ["0"], "z": ["0", "1"], "p": [[[0.5, 0.5]], [[0.5, 0.6]]]})
        with self.assertRaises(ChannelError) as ctx:
            parse_channel(text)
        self.assertEqual(ctx.exception.row, 1)

    def test_validate_reports_first_bad_row(self):
        law = np.zeros((2, 1, 2))
        law[0, 0] = [0.5, 0.5]
        law[1, 0] = [0.2, 0.2]
        diagnostic = validate(BroadcastChannel(law))
        self.assertFalse(diagnostic)
        self.assertEqual(diagnostic.row, 1)
        self.assertAlmostEqual(diagnostic.residual, 0.6)

    def test_resolve_channel(self):
        self.assertEqual(resolve_channel(bec=0.3).z_size, 3)
        self.assertEqual(resolve_channel("example2").x_names, ("1", "2", "3"))
        with self.assertRaises(ChannelFormatError):
            resolve_channel("no-such-channel.json")


class MarginalTests(SimpleTestCase):
    def test_erasure_marginals(self):
        ch = bec_channel(0.3)
        np.testing.assert_allclose(marginal(ch, Party.JUDY).rows, [[0.7, 0.3, 0.0], [0.0, 0.3, 0.7]])
        np.testing.assert_allclose(marginal(ch, Party.BOB).rows, np.eye(2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_marginal_rows_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        law = rng.dirichlet(np.ones(6), size=3).reshape(3, 2, 3)
        ch = BroadcastChannel(law)
        for party in Party:
            np.testing.assert_allclose(marginal(ch, party).rows.sum(axis=1), 1.0, atol=1e-12)

    def test_compose(self):
        bob = Dmc(np.eye(2))
        erasure = Dmc([[0.7, 0.3, 0.0], [0.0, 0.3, 0.7]])
        np.testing.assert_allclose(bob.compose(erasure).rows, erasure.rows)
        with self.assertRaises(ShapeMismatchError):
            erasure.compose(erasure)


class DegradednessTests(SimpleTestCase):
    def test_erasure_example_is_degraded(self):
        ch = bec_channel(0.3)
        degraded, witness = is_physically_degraded(ch)
        self.assertTrue(degraded)
        composed = marginal(ch, Party.BOB).rows @ witness.rows
        np.testing.assert_allclose(composed, marginal(ch, Party.JUDY).rows, atol=1e-7)

    def test_swapped_channel_is_not_degraded(self):
        degraded, witness = is_physically_degraded(swapped_channel())
        self.assertFalse(degraded)
        self.assertIsNone(witness)
        with self.assertRaises(NotDegradedError):
            degrading_witness(swapped_channel())

    def test_factorised_law_gives_exact_witness(self):
        witness, exact = degrading_witness(example2_channel())
        self.assertTrue(exact)
        np.testing.assert_allclose(witness.rows, marginal(example2_channel(), Party.JUDY).rows, atol=1e-15)

    def test_stochastically_degraded_law(self):
        # Y and Z independent given X, with P(z|x) = P(y|x) W
        bob = np.array([[0.9, 0.1], [0.1, 0.9]])
        w = np.array([[0.8, 0.2], [0.3, 0.7]])
        judy = bob @ w
        law = bob[:, :, None] * judy[:, None, :]
        ch = BroadcastChannel(law)
        witness, exact = degrading_witness(ch)
        self.assertFalse(exact)
        np.testing.assert_allclose(bob @ witness.rows, judy, atol=1e-7)
        rebuilt = physically_degraded_law(marginal(ch, Party.BOB), witness)
        np.testing.assert_allclose(marginal(rebuilt, Party.JUDY).rows, judy, atol=1e-7)


class SequenceTests(SimpleTestCase):
    def test_erasure_sequence(self):
        judy = marginal(bec_channel(0.3), Party.JUDY)
        self.assertAlmostEqual(sequence_likelihood(judy, [0, 1], [1, 2]), 0.21, places=12)

    def test_empty_sequence(self):
        judy = marginal(bec_channel(0.3), Party.JUDY)
        self.assertEqual(sequence_likelihood(judy, [], []), 1.0)
        np.testing.assert_array_equal(sequence_likelihoods(judy, []), [1.0])

    def test_likelihoods_sum_to_one(self):
        judy = marginal(example2_channel(), Party.JUDY)
        for n in range(1, 6):
            x = np.arange(n) % 3
            self.assertAlmostEqual(sequence_likelihoods(judy, x).sum(), 1.0, places=9)

    def test_likelihoods_are_row_major(self):
        judy = marginal(bec_channel(0.3), Party.JUDY)
        table = sequence_likelihoods(judy, [0, 1])
        digits = sequence_digits(2, 3)
        for k, z in enumerate(digits):
            self.assertAlmostEqual(table[k], sequence_likelihood(judy, [0, 1], z), places=15)

    def test_symbol_outside_alphabet(self):
        judy = marginal(bec_channel(0.3), Party.JUDY)
        with self.assertRaises(AlphabetError):
            sequence_likelihood(judy, [0, 2], [0, 0])
        with self.assertRaises(ShapeMismatchError):
            sequence_likelihood(judy, [0, 1], [0])


class TypicalityTests(SimpleTestCase):
    def test_exact_empirical_match(self):
        self.assertTrue(is_strongly_typical([0, 1, 0, 1], Pmf([0.5, 0.5]), 0.1))
        self.assertTrue(is_strongly_typical([0] * 3 + [1] * 7, Pmf([0.3, 0.7]), 1e-9))

    def test_constant_sequence(self):
        self.assertFalse(is_strongly_typical([0, 0, 0, 0], Pmf([0.5, 0.5]), 0.1))

    def test_empty_sequence(self):
        with self.assertRaises(ShapeMismatchError):
            is_strongly_typical([], Pmf([0.5, 0.5]), 0.1)

    def test_joint_typicality(self):
        bob = Dmc(np.eye(2))
        p_x = Pmf([0.5, 0.5])
        self.assertTrue(joint_typicality([0, 1, 0, 1], [0, 1, 0, 1], p_x, bob, 0.1))
        self.assertFalse(joint_typicality([0, 1, 0, 1], [1, 0, 1, 0], p_x, bob, 0.1))
