import numpy as np
import pytest

from strokeforge.painterly import BrushModel
from strokeforge.raster import RasterError, RasterImage
from strokeforge.render import (
    PostProcessing,
    RenderOptions,
    post_process,
    rasterize_stroke,
    render_sequence,
)
from strokeforge.strokes import Stroke


def make_stroke(**kwargs):
    base = dict(
        x=16.0,
        y=16.0,
        orientation=0.0,
        length=10.0,
        thickness=4.0,
        color=(0.8, 0.2, 0.1, 1.0),
        size=4.0,
        priority=0.0,
    )
    base.update(kwargs)
    return Stroke(**base)


class TestRasterizeStroke:
    def test_opaque_interior_exact_color(self):
        canvas = RasterImage.full(32, 32, (0.0, 0.0, 0.0, 1.0))
        s = make_stroke(color=(0.3, 0.6, 0.9, 1.0))
        out = rasterize_stroke(canvas, s)
        np.testing.assert_array_equal(out.data[16, 16, :3], [0.3, 0.6, 0.9])
        np.testing.assert_array_equal(out.data[16, 14, :3], [0.3, 0.6, 0.9])

    def test_transparent_stroke_identity(self):
        rng = np.random.default_rng(0)
        canvas = RasterImage(rng.random((16, 16, 3)))
        s = make_stroke(x=8.0, y=8.0, color=(1.0, 0.0, 0.0, 0.0))
        out = rasterize_stroke(canvas, s)
        np.testing.assert_array_equal(out.data, canvas.data)

    def test_half_opacity_red_on_black(self):
        canvas = RasterImage.full(32, 32, (0.0, 0.0, 0.0, 1.0))
        s = make_stroke(color=(1.0, 0.0, 0.0, 0.5))
        out = rasterize_stroke(canvas, s)
        np.testing.assert_allclose(out.data[16, 16, :3], [0.5, 0.0, 0.0], atol=1e-12)

    def test_footprint_respects_geometry(self):
        canvas = RasterImage.full(64, 64, (1.0, 1.0, 1.0, 1.0))
        s = make_stroke(x=32.0, y=32.0, orientation=0.0, length=20.0, size=3.0)
        out = rasterize_stroke(canvas, s)
        # spine runs along x; pixels far off-axis stay untouched
        assert np.array_equal(out.data[32 + 10, 32], [1.0, 1.0, 1.0, 1.0])
        assert not np.array_equal(out.data[32, 32], [1.0, 1.0, 1.0, 1.0])
        assert not np.array_equal(out.data[32, 32 + 9], [1.0, 1.0, 1.0, 1.0])

    def test_brush_variants_change_footprints(self):
        canvas = RasterImage.full(48, 48, (1.0, 1.0, 1.0, 1.0))
        s = make_stroke(x=24.0, y=24.0, orientation=0.4, color=(0.0, 0.0, 0.0, 1.0))
        footprints = {}
        for brush in BrushModel:
            out = rasterize_stroke(canvas, s, brush)
            footprints[brush] = int((out.data[:, :, :3] != 1.0).any(axis=-1).sum())
        assert footprints[BrushModel.CURVED] > footprints[BrushModel.RECTANGLE]
        assert footprints[BrushModel.RANDOM_RASTER] < footprints[BrushModel.CURVED]

    def test_textures_deterministic_and_distinct(self):
        canvas = RasterImage.full(32, 32, (1.0, 1.0, 1.0, 1.0))
        outs = {}
        for texture in ("solid", "stipple", "hatch"):
            s = make_stroke(texture=texture, color=(0.0, 0.0, 0.0, 1.0))
            a = rasterize_stroke(canvas, s)
            b = rasterize_stroke(canvas, s)
            np.testing.assert_array_equal(a.data, b.data)
            outs[texture] = a.data
        assert not np.array_equal(outs["solid"], outs["stipple"])
        assert not np.array_equal(outs["solid"], outs["hatch"])

    def test_gray_canvas_rejected(self):
        with pytest.raises(RasterError):
            rasterize_stroke(RasterImage.full(8, 8, 0.5), make_stroke())


class TestRenderSequence:
    def test_empty_plan_is_background(self):
        options = RenderOptions(background=(0.1, 0.2, 0.3, 1.0))
        out = render_sequence([], (10, 8), options)
        assert out.width == 10 and out.height == 8
        np.testing.assert_array_equal(out.data, np.broadcast_to([0.1, 0.2, 0.3, 1.0], (8, 10, 4)))

    def test_priority_order_controls_overlap(self):
        low = make_stroke(color=(1.0, 0.0, 0.0, 1.0), priority=0.0)
        high = make_stroke(color=(0.0, 1.0, 0.0, 1.0), priority=1.0)
        out = render_sequence([high, low], (32, 32))
        np.testing.assert_array_equal(out.data[16, 16, :3], [0.0, 1.0, 0.0])
        out2 = render_sequence(
            [high, low], (32, 32), RenderOptions(order_policy="input_order")
        )
        np.testing.assert_array_equal(out2.data[16, 16, :3], [1.0, 0.0, 0.0])

    def test_one_at_a_time_equals_batch(self):
        rng = np.random.default_rng(1)
        strokes = [
            make_stroke(
                x=float(rng.uniform(4, 28)),
                y=float(rng.uniform(4, 28)),
                orientation=float(rng.uniform(-3, 3)),
                color=tuple(rng.random(3)) + (float(rng.uniform(0.3, 1.0)),),
                priority=float(rng.random()),
            )
            for _ in range(12)
        ]
        options = RenderOptions()
        batch = render_sequence(strokes, (32, 32), options)
        canvas = RasterImage.full(32, 32, options.background)
        for s in sorted(strokes, key=lambda t: t.priority):
            canvas = rasterize_stroke(canvas, s)
        np.testing.assert_array_equal(batch.data, canvas.data)

    def test_disjoint_strokes_commute(self):
        a = make_stroke(x=8.0, y=8.0, length=4.0, size=2.0, color=(1.0, 0.0, 0.0, 0.7))
        b = make_stroke(x=40.0, y=40.0, length=4.0, size=2.0, color=(0.0, 0.0, 1.0, 0.7))
        options = RenderOptions(order_policy="input_order")
        out_ab = render_sequence([a, b], (48, 48), options)
        out_ba = render_sequence([b, a], (48, 48), options)
        np.testing.assert_array_equal(out_ab.data, out_ba.data)

    def test_determinism(self):
        rng = np.random.default_rng(2)
        strokes = [
            make_stroke(
                x=float(rng.uniform(2, 30)),
                y=float(rng.uniform(2, 30)),
                texture="stipple",
                priority=float(rng.random()),
            )
            for _ in range(8)
        ]
        options = RenderOptions(post=PostProcessing(edge_enhance_amount=0.6))
        a = render_sequence(strokes, (32, 32), options)
        b = render_sequence(strokes, (32, 32), options)
        np.testing.assert_array_equal(a.data, b.data)

    def test_output_in_unit_range(self):
        rng = np.random.default_rng(3)
        strokes = [
            make_stroke(
                x=float(rng.uniform(0, 31)),
                y=float(rng.uniform(0, 31)),
                color=tuple(rng.random(4)),
            )
            for _ in range(10)
        ]
        options = RenderOptions(
            post=PostProcessing(denoise_radius=1.5, edge_enhance_amount=3.0, harmonize_strength=0.5)
        )
        out = render_sequence(strokes, (32, 32), options)
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0


class TestPostProcess:
    def test_all_absent_identity(self):
        rng = np.random.default_rng(4)
        img = RasterImage(rng.random((12, 12, 3)))
        out = post_process(img, PostProcessing())
        np.testing.assert_array_equal(out.data, img.data)

    def test_edge_enhance_zero_identity(self):
        rng = np.random.default_rng(5)
        img = RasterImage(rng.random((12, 12, 3)))
        out = post_process(img, PostProcessing(edge_enhance_amount=0.0))
        np.testing.assert_array_equal(out.data, img.data)

    def test_harmonize_full_pull_reaches_mean_chroma(self):
        rng = np.random.default_rng(6)
        data = 0.3 + 0.4 * rng.random((10, 10, 3))
        img = RasterImage(data)
        out = post_process(img, PostProcessing(harmonize_strength=1.0))
        r, g, b = out.data[:, :, 0], out.data[:, :, 1], out.data[:, :, 2]
        c1 = r - g
        c2 = b - (r + g) / 2.0
        np.testing.assert_allclose(c1, c1.mean(), atol=1e-9)
        np.testing.assert_allclose(c2, c2.mean(), atol=1e-9)
        # luminance untouched
        lum_in = data.sum(axis=-1) / 3.0
        lum_out = out.data.sum(axis=-1) / 3.0
        np.testing.assert_allclose(lum_out, lum_in, atol=1e-9)

    def test_denoise_reduces_noise_variance(self):
        rng = np.random.default_rng(7)
        base = np.full((16, 16, 3), 0.5)
        noisy = np.clip(base + rng.normal(0, 0.02, base.shape), 0, 1)
        img = RasterImage(noisy)
        out = post_process(img, PostProcessing(denoise_radius=2.0))
        assert out.data.std() < noisy.std()

    def test_denoise_preserves_strong_edges(self):
        data = np.zeros((16, 16, 3))
        data[:, 8:] = 1.0
        out = post_process(RasterImage(data), PostProcessing(denoise_radius=2.0))
        assert out.data[8, 4, 0] < 0.1
        assert out.data[8, 12, 0] > 0.9

    def test_invalid_options(self):
        with pytest.raises(RasterError):
            PostProcessing(denoise_radius=-1.0)
        with pytest.raises(RasterError):
            PostProcessing(harmonize_strength=2.0)
        with pytest.raises(RasterError):
            RenderOptions(order_policy="random")
