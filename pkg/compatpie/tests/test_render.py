import math
import unittest
import xml.etree.ElementTree as ElementTree

from parameterized import parameterized

from compatpie.compatibility import CompatibilityCurve, CurveGrid, compatibility_curve
from compatpie.errors import EmptyCurveError, UnsupportedFormatError
from compatpie.interval import TestMethod
from compatpie.render import (
    RenderFormat,
    format_float,
    format_half_up,
    load_curve,
    render_curve,
    render_curves,
)
from compatpie.table import EXAMPLE_TABLE, new_table

SVG = "{http://www.w3.org/2000/svg}"


def groups(document: bytes, gid: str) -> list[ElementTree.Element]:
    root = ElementTree.fromstring(document)
    return [g for g in root.iter(f"{SVG}g") if g.get("id") == gid]


class RenderTestCase(unittest.TestCase):
    curve: CompatibilityCurve
    wald: CompatibilityCurve

    @classmethod
    def setUpClass(cls):
        t = new_table(*EXAMPLE_TABLE)
        grid = CurveGrid(0.5, 16.0, 20)
        cls.curve = compatibility_curve(t, grid, alpha_marks=(0.05, 0.1))
        cls.wald = compatibility_curve(t, grid, TestMethod.WALD)


class TestCsv(RenderTestCase):
    def test_layout(self):
        text = render_curve(self.curve, "csv").decode()
        lines = text.split("\n")

        self.assertEqual("method,psi,p,s", lines[0])
        self.assertTrue(all(line.startswith("exact,") for line in lines[1:-1]))
        self.assertEqual(len(self.curve.points) + 2, len(lines))
        self.assertEqual("", lines[-1])
        self.assertNotIn("\r", text)

    def test_single_curve_keeps_method(self):
        (back,) = load_curve(render_curve(self.wald, "csv"), "csv")

        self.assertEqual(TestMethod.WALD, back.method)
        self.assertEqual(len(self.wald.points), len(back.points))

    def test_untagged_document_reads_as_exact(self):
        (back,) = load_curve("psi,p,s\n1,0.5,1\n2,1,0\n", "csv")

        self.assertEqual(TestMethod.EXACT, back.method)
        self.assertEqual([1.0, 2.0], [pt.psi for pt in back.points])

    def test_round_trip(self):
        (back,) = load_curve(render_curve(self.curve, RenderFormat.CSV), "csv")

        self.assertEqual(len(self.curve.points), len(back.points))
        for mine, theirs in zip(self.curve.points, back.points):
            self.assertAlmostEqual(mine.psi, theirs.psi, delta=1e-13 * mine.psi)
            self.assertAlmostEqual(mine.p, theirs.p, delta=1e-13)

    def test_several_curves(self):
        text = render_curves([self.curve, self.wald], "csv").decode()
        back = load_curve(text, "csv")

        self.assertTrue(text.startswith("method,psi,p,s\n"))
        self.assertEqual([TestMethod.EXACT, TestMethod.WALD], [c.method for c in back])


class TestJson(RenderTestCase):
    def test_round_trip(self):
        (back,) = load_curve(render_curve(self.curve, "json"), "json")

        self.assertEqual(self.curve, back)

    def test_several_curves(self):
        back = load_curve(render_curves([self.curve, self.wald], "JSON"), "json")

        self.assertEqual([self.curve, self.wald], back)


class TestSvg(RenderTestCase):
    def test_series_and_marks(self):
        document = render_curves([self.curve, self.wald], "svg")

        for gid in ("series-exact", "series-wald"):
            found = groups(document, gid)
            self.assertEqual(1, len(found))
            self.assertEqual(1, len(list(found[0].iter(f"{SVG}path"))))
        self.assertEqual(1, len(groups(document, "alpha-0.05")))
        self.assertEqual(1, len(groups(document, "alpha-0.1")))

    def test_deterministic(self):
        self.assertEqual(render_curve(self.curve, "svg"), render_curve(self.curve, "svg"))

    def test_size(self):
        root = ElementTree.fromstring(render_curve(self.curve, "svg", 800, 500))

        self.assertEqual("576pt", root.get("width"))
        self.assertEqual("360pt", root.get("height"))


class TestRenderErrors(RenderTestCase):
    @parameterized.expand([("png",), ("",)])
    def test_unsupported(self, fmt: str):
        with self.assertRaises(UnsupportedFormatError):
            render_curve(self.curve, fmt)

    def test_empty(self):
        with self.assertRaises(EmptyCurveError):
            render_curve(CompatibilityCurve((), TestMethod.EXACT, "empty"), "csv")

    def test_format_float(self):
        self.assertEqual("inf", format_float(math.inf))
        self.assertEqual("0.1", format_float(0.1))
        self.assertEqual("0.333333333333333", format_float(1 / 3))

    @parameterized.expand(
        [
            (0.0625, 3, "0.063"),
            (0.03125, 3, "0.031"),
            (0.125, 2, "0.13"),
            (0.5, 3, "0.500"),
            (1e-7, 3, "0.000"),
        ]
    )
    def test_format_half_up(self, value: float, digits: int, expected: str):
        self.assertEqual(expected, format_half_up(value, digits))
