import math
import unittest

from parameterized import parameterized

from compatpie.errors import (
    EmptyTableError,
    InvalidSpecError,
    NegativeCountError,
    NonIntegerCountError,
)
from compatpie.table import (
    EXAMPLE_TABLE,
    AssociationSummary,
    Ratio,
    RatioTag,
    Table2x2,
    flip_exposure,
    new_table,
    summarize,
)


class TestNewTable(unittest.TestCase):
    def test_margins(self):
        t = new_table(*EXAMPLE_TABLE)

        self.assertEqual(600, t.total)
        self.assertEqual(26, t.cases)
        self.assertEqual(574, t.noncases)
        self.assertEqual(120, t.exposed)
        self.assertEqual(480, t.unexposed)
        self.assertEqual("10,110,16,464", str(t))

    @parameterized.expand(
        [
            ((-1, 2, 3, 4), NegativeCountError),
            ((1.5, 2, 3, 4), NonIntegerCountError),
            ((1, 2, 3, 4.25), NonIntegerCountError),
            ((0, 0, 0, 0), EmptyTableError),
        ]
    )
    def test_rejects(self, cells, error):
        with self.assertRaises(error):
            new_table(*cells)

    def test_non_integer_is_not_a_negative_count(self):
        with self.assertRaisesRegex(NonIntegerCountError, "cell a must be a whole count") as caught:
            new_table(2.5, 2, 3, 4)

        self.assertNotIsInstance(caught.exception, NegativeCountError)

    def test_printed_orientation(self):
        self.assertEqual(new_table(*EXAMPLE_TABLE), Table2x2.from_printed(16, 10, 464, 110))

    def test_zero_cells_and_margins(self):
        self.assertTrue(new_table(0, 5, 3, 4).has_zero_cell())
        self.assertFalse(new_table(0, 5, 3, 4).has_zero_margin())
        self.assertTrue(new_table(0, 5, 0, 4).has_zero_margin())

    def test_scaled(self):
        self.assertEqual(new_table(20, 220, 32, 928), new_table(*EXAMPLE_TABLE).scaled(2))

    def test_dict_round_trip(self):
        t = new_table(*EXAMPLE_TABLE)

        self.assertEqual(t, Table2x2.from_dict(t.to_dict()))
        with self.assertRaises(InvalidSpecError):
            Table2x2.from_dict({"a": 1})


class TestSummarize(unittest.TestCase):
    def test_table_one(self):
        s = summarize(new_table(*EXAMPLE_TABLE))

        self.assertAlmostEqual(10 / 120, s.p_exposed)
        self.assertAlmostEqual(16 / 480, s.p_unexposed)
        self.assertAlmostEqual(0.05, s.rd)
        self.assertAlmostEqual(2.5, s.rr.value)
        self.assertAlmostEqual(2.636364, s.or_.value, places=6)
        self.assertEqual("2.64", s.or_.format(2))
        self.assertAlmostEqual(5.2, s.expected[0])
        self.assertAlmostEqual(114.8, s.expected[1])
        self.assertAlmostEqual(20.8, s.expected[2])
        self.assertAlmostEqual(459.2, s.expected[3])

    def test_expected_keeps_margins(self):
        t = new_table(7, 3, 2, 9)
        e = summarize(t).expected

        self.assertAlmostEqual(t.exposed, e[0] + e[1])
        self.assertAlmostEqual(t.cases, e[0] + e[2])

    def test_zero_denominators(self):
        s = summarize(new_table(3, 0, 2, 5))

        self.assertEqual(RatioTag.INFINITE, s.or_.tag)
        self.assertEqual("inf", s.or_.format(2))
        self.assertEqual(RatioTag.UNDEFINED, summarize(new_table(0, 0, 2, 5)).or_.tag)
        self.assertTrue(math.isnan(summarize(new_table(0, 0, 2, 5)).p_exposed))

    def test_flip_inverts_odds_ratio(self):
        t = new_table(*EXAMPLE_TABLE)

        self.assertAlmostEqual(
            1 / summarize(t).or_.value, summarize(flip_exposure(t)).or_.value
        )
        self.assertEqual(Ratio(0.0), Ratio(math.inf, RatioTag.INFINITE).inverse())

    def test_dict_round_trip(self):
        s = summarize(new_table(3, 0, 2, 5))
        back = AssociationSummary.from_dict(s.to_dict())

        self.assertEqual(s.or_.tag, back.or_.tag)
        self.assertEqual(s.expected, back.expected)
