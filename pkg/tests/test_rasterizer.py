import math

import numpy as np
import pytest

from svgatom.atomize import Arc, AtomicPath, AtomicSVG, Close, Cubic, Line, Move, atomize
from svgatom.errors import BadMagic
from svgatom.raster import Raster, RenderOptions, flatten_path, rasterize, read_ppm, write_ppm
from svgatom.scene import parse_svg


def _rect_path(x0, y0, x1, y1, fill=(0, 0, 0)):
    return AtomicPath(fill=fill, commands=[
        Move((x0, y0)), Line((x1, y0)), Line((x1, y1)), Line((x0, y1)), Close()])


class TestFlattenPath:
    def test_triangle(self):
        path = AtomicPath(fill=(0, 0, 0), commands=[
            Move((0, 0)), Line((10, 0)), Line((10, 10)), Close()])
        (poly,) = flatten_path(path)
        assert poly == [(0, 0), (10, 0), (10, 10)]

    def test_open_subpath_implicitly_closed(self):
        path = AtomicPath(fill=(0, 0, 0), commands=[
            Move((0, 0)), Line((10, 0)), Line((10, 10))])
        (poly,) = flatten_path(path)
        assert poly[0] == (0, 0)  # filling closes back to the start

    def test_quarter_circle_within_tolerance(self):
        k = 50 * 4 / 3 * (math.sqrt(2) - 1)
        path = AtomicPath(fill=(0, 0, 0), commands=[
            Move((50, 0)), Cubic((50, k), (k, 50), (0, 50))])
        (poly,) = flatten_path(path, tolerance=0.1)
        for x, y in poly:
            assert abs(math.hypot(x, y) - 50) < 0.1 + 0.001 * 50

    def test_degenerate_arc_drawn_as_line(self):
        path = AtomicPath(fill=(0, 0, 0), commands=[
            Move((0, 0)), Arc(0, 0, 0, False, False, (10, 0)), Line((10, 10))])
        (poly,) = flatten_path(path)
        assert (10.0, 0.0) in [tuple(map(float, p)) for p in poly]


class TestRasterize:
    def test_integer_aligned_rect_exact_pixels(self):
        svg = AtomicSVG(paths=[_rect_path(50, 50, 150, 150)])
        r = rasterize(svg, RenderOptions(size=200, supersample=1))
        black = np.all(r.rgb() == 0, axis=2)
        assert int(black.sum()) == 100 * 100

    def test_circle_area(self):
        tree = parse_svg('<svg viewBox="0 0 200 200">'
                         '<circle cx="100" cy="100" r="50" fill="black"/></svg>')
        r = rasterize(atomize(tree), RenderOptions(size=200, supersample=4))
        dark = np.all(r.rgb() < 128, axis=2)
        area = int(dark.sum())
        assert abs(area - math.pi * 2500) < 0.01 * math.pi * 2500

    def test_annulus_nonzero_vs_evenodd(self):
        ring = [Move((20, 100)), Arc(80, 80, 0, True, True, (180, 100)),
                Arc(80, 80, 0, True, True, (20, 100)), Close(),
                Move((60, 100)), Arc(40, 40, 0, True, True, (140, 100)),
                Arc(40, 40, 0, True, True, (60, 100)), Close()]
        same_dir_nonzero = AtomicSVG(paths=[AtomicPath(fill=(0, 0, 0), commands=list(ring),
                                                       fill_rule="nonzero")])
        same_dir_evenodd = AtomicSVG(paths=[AtomicPath(fill=(0, 0, 0), commands=list(ring),
                                                       fill_rule="evenodd")])
        opts = RenderOptions(size=200, supersample=2)
        center_nz = rasterize(same_dir_nonzero, opts).rgb()[100, 100]
        center_eo = rasterize(same_dir_evenodd, opts).rgb()[100, 100]
        assert tuple(center_nz) == (0, 0, 0)       # solid disc
        assert tuple(center_eo) == (255, 255, 255)  # hole

    def test_painter_order_last_wins(self):
        svg = AtomicSVG(paths=[_rect_path(0, 0, 100, 100, (255, 0, 0)),
                               _rect_path(40, 40, 60, 60, (0, 0, 255))])
        r = rasterize(svg, RenderOptions(size=200, supersample=1))
        assert tuple(r.rgb()[50, 50]) == (0, 0, 255)
        assert tuple(r.rgb()[10, 10]) == (255, 0, 0)

    def test_determinism(self):
        svg = AtomicSVG(paths=[_rect_path(13, 27, 155, 181, (10 * 17, 3 * 17, 200))])
        a = rasterize(svg)
        b = rasterize(svg)
        assert np.array_equal(a.pixels, b.pixels)

    def test_supersampling_tightens_area(self):
        tree = parse_svg('<svg viewBox="0 0 200 200">'
                         '<circle cx="100" cy="100" r="70" fill="black"/></svg>')
        svg = atomize(tree)
        true_area = math.pi * 70 * 70
        errs = []
        for ss in (1, 4):
            r = rasterize(svg, RenderOptions(size=200, supersample=ss))
            dark = np.all(r.rgb() < 128, axis=2)
            errs.append(abs(int(dark.sum()) - true_area))
        assert errs[1] <= errs[0]


class TestPpm:
    def test_one_pixel_white(self, tmp_path):
        r = Raster(1, 1, np.full((1, 1, 4), 255, np.uint8))
        p = tmp_path / "w.ppm"
        write_ppm(r, p)
        assert p.read_bytes() == b"P6\n1 1\n255\n\xff\xff\xff"

    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        px = rng.integers(0, 256, (16, 12, 4), dtype=np.uint8)
        px[:, :, 3] = 255
        r = Raster(12, 16, px)
        p = tmp_path / "r.ppm"
        write_ppm(r, p)
        back = read_ppm(p)
        assert back.width == 12 and back.height == 16
        assert np.array_equal(back.rgb(), r.rgb())

    def test_truncated_rejected(self, tmp_path):
        p = tmp_path / "bad.ppm"
        p.write_bytes(b"P6\n4 4\n255\nxx")
        with pytest.raises(BadMagic):
            read_ppm(p)

    def test_not_ppm(self, tmp_path):
        p = tmp_path / "bad2.ppm"
        p.write_bytes(b"GIF89a")
        with pytest.raises(BadMagic):
            read_ppm(p)
