"""Acceptance suite: one test per release criterion, one printed line each.

Every criterion runs at its stated tolerance; timing-bound criteria assert
their wall-clock budget too.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
from fastapi.testclient import TestClient

from conftest import synthetic_photo
from strokeforge.config import config_from_dict, config_to_json, parse_config
from strokeforge.features import FeatureBundle, FeatureWeights, generate_candidates
from strokeforge.neural import (
    FeatureTensor,
    StylizeConfig,
    default_extractor,
    gram,
    stylize,
    total_loss_and_gradient,
)
from strokeforge.painterly import (
    BrushModel,
    LayerSpec,
    PainterlyConfig,
    paint_layer,
    render_painterly,
)
from strokeforge.planning import (
    HybridParams,
    IdentityRefiner,
    LocalSearchRefiner,
    PlanSettings,
    StrokeCandidate,
    blend_correction,
    init_strokes,
    merge_strokes,
    plan,
)
from strokeforge.planio import parse_plan, serialize_plan
from strokeforge.raster import (
    RasterImage,
    ScalarField,
    gaussian_blur,
    luminance,
    sobel_gradients,
)
from strokeforge.service import create_app
from strokeforge.strokes import Stroke


def report(number: int, description: str):
    print(f"\n[criterion {number:02d}] PASS {description}")


def random_stroke(rng, w=64, h=64):
    return Stroke(
        x=float(rng.uniform(0, w - 1)),
        y=float(rng.uniform(0, h - 1)),
        orientation=float(rng.uniform(-math.pi, math.pi)),
        length=float(rng.uniform(0, 20)),
        thickness=float(rng.uniform(0.1, 8)),
        color=tuple(rng.random(4)),
        texture=("solid", "stipple", "hatch")[int(rng.integers(0, 3))],
        size=float(rng.uniform(0.5, 10)),
        weight=float(rng.random()),
        priority=float(rng.standard_normal()),
    )


def make_bundle(rng, size=24, scale=1.0):
    return FeatureBundle(
        edges=ScalarField(rng.random((size, size)) * scale),
        saliency=ScalarField(rng.random((size, size)) * scale),
        density=ScalarField(rng.random((size, size)) * 0.8 + 0.2),
    )


def test_criterion_01_blend_endpoints():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    for _ in range(1000):
        a = random_stroke(rng)
        b = random_stroke(rng)
        assert blend_correction(a, b, 0.0) == a
        assert blend_correction(a, b, 1.0) == b
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"blend endpoint sweep took {elapsed:.2f}s"
    report(1, f"1000 blend pairs bit-exact at gamma endpoints in {elapsed:.2f}s")


def test_criterion_02_priority_argmax_invariance():
    start = time.perf_counter()
    size = 24
    for seed in range(10):
        rng = np.random.default_rng(seed)
        # base fields scaled to [0, 0.1] so x10 stays a valid bundle
        e = rng.random((size, size)) * 0.1
        s = rng.random((size, size)) * 0.1
        d = rng.random((size, size)) * 0.8 + 0.2
        img = RasterImage(rng.random((size, size, 3)))
        grads = sobel_gradients(luminance(img))
        cands = [
            StrokeCandidate(x=int(x), y=int(y), weight=1.0)
            for x, y in zip(rng.integers(0, size, 40), rng.integers(0, size, 40))
        ]
        params = HybridParams(lambda_priority=0.41)

        def sorted_anchors(edges, saliency):
            bundle = FeatureBundle(
                edges=ScalarField(edges),
                saliency=ScalarField(saliency),
                density=ScalarField(d),
            )
            strokes = init_strokes(cands, grads, bundle, img, params)
            return [
                st.anchor for st in sorted(strokes, key=lambda st: (st.priority, st.y, st.x))
            ]

        base = sorted_anchors(e, s)
        for c in (0.1, 2.0, 10.0):
            assert sorted_anchors(e * c, s * c) == base
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"priority invariance sweep took {elapsed:.2f}s"
    report(2, f"priority order invariant under joint S/E scaling in {elapsed:.2f}s")


def test_criterion_03_candidate_weight_formula_oracle():
    checked = 0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        bundle = make_bundle(rng, size=32)
        weights = FeatureWeights(
            float(rng.uniform(0, 2)), float(rng.uniform(0, 2)), float(rng.uniform(0.1, 2))
        )
        cands = generate_candidates(bundle, weights, 200, rng_seed=seed)
        assert len(cands) == 200
        for cand in cands:
            expected = (
                weights.alpha_e * bundle.edges.data[cand.y, cand.x]
                + weights.beta_s * bundle.saliency.data[cand.y, cand.x]
                + weights.gamma_d * bundle.density.data[cand.y, cand.x]
            )
            assert abs(cand.weight - expected) <= 1e-12
            checked += 1
    report(3, f"{checked} candidate weights match direct blend re-evaluation within 1e-12")


def test_criterion_04_gram_properties():
    rng = np.random.default_rng(2)
    for _ in range(100):
        c = int(rng.integers(1, 7))
        h, w = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        g = gram(FeatureTensor(rng.standard_normal((c, h, w))))
        assert np.abs(g.data - g.data.T).max() <= 1e-12
        for _ in range(4):
            x = rng.standard_normal(c)
            assert x @ g.data @ x >= -1e-9
    # dyadic-rational samples make every product and partial sum exactly
    # representable, so the equality is bitwise regardless of accumulation order
    data = rng.integers(-64, 65, size=(2, 2, 2)) / 16.0
    g = gram(FeatureTensor(data))
    n = 8
    for i in range(2):
        for j in range(2):
            brute = sum(
                data[i, y, x] * data[j, y, x] for y in range(2) for x in range(2)
            )
            assert g.data[i, j] == brute / n
    report(4, "gram symmetry/PSD on 100 tensors; 2x2x2 matches brute-force oracle exactly")


def test_criterion_05_gradient_check():
    start = time.perf_counter()
    ext = default_extractor(17)
    cfg = StylizeConfig(alpha_content=1.0, beta_style=1.0)
    step = 1e-5
    for seed in range(10):
        rng = np.random.default_rng(200 + seed)
        i_t = RasterImage(0.1 + 0.8 * rng.random((8, 8, 1)))
        i_c = RasterImage(0.1 + 0.8 * rng.random((8, 8, 1)))
        i_s = RasterImage(0.1 + 0.8 * rng.random((8, 8, 1)))
        _, grad = total_loss_and_gradient(i_t, i_c, i_s, ext, cfg)
        for _ in range(50):
            y, x = rng.integers(0, 8, 2)
            plus = np.array(i_t.data)
            plus[y, x, 0] += step
            minus = np.array(i_t.data)
            minus[y, x, 0] -= step
            lp, _ = total_loss_and_gradient(RasterImage(plus), i_c, i_s, ext, cfg)
            lm, _ = total_loss_and_gradient(RasterImage(minus), i_c, i_s, ext, cfg)
            fd = (lp - lm) / (2 * step)
            a = grad[y, x, 0]
            rel = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
            assert rel < 1e-4, f"pixel ({x},{y}) rel error {rel:.2e}"
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"gradient check took {elapsed:.2f}s"
    report(5, f"analytic gradient within 1e-4 of central differences (500 probes, {elapsed:.1f}s)")


def test_criterion_06_descent_progress():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    content = RasterImage(0.1 + 0.8 * rng.random((32, 32, 3)))
    style = RasterImage(0.1 + 0.8 * rng.random((32, 32, 3)))
    ext = default_extractor(7)
    fast = StylizeConfig(eta=0.5, iterations=200)
    _, hist = stylize(content, style, ext, fast)
    assert hist[-1] <= 0.5 * hist[0], f"loss ratio {hist[-1] / hist[0]:.3f}"
    careful = StylizeConfig(eta=0.05, iterations=200)
    _, hist_slow = stylize(content, style, ext, careful)
    for a, b in zip(hist_slow, hist_slow[1:]):
        assert b - a <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"descent runs took {elapsed:.2f}s"
    report(
        6,
        f"loss ratio {hist[-1] / hist[0]:.3f} <= 0.5 at eta=0.5; "
        f"monotone at eta=0.05 ({elapsed:.1f}s)",
    )


def cell_error_map_oracle(canvas, reference, step):
    """Independent per-cell mean color distance recomputation."""
    h, w = reference.height, reference.width
    diff = np.sqrt(((canvas.data - reference.data) ** 2).sum(axis=-1))
    cells = {}
    for y0 in range(0, h, step):
        for x0 in range(0, w, step):
            block = diff[y0 : min(y0 + step, h), x0 : min(x0 + step, w)]
            cells[(x0 // step, y0 // step)] = float(block.mean())
    return cells


def test_criterion_07_layered_painting():
    for seed in range(3):
        img = synthetic_photo(seed)
        config = PainterlyConfig(
            layers=(LayerSpec(8.0), LayerSpec(4.0), LayerSpec(2.0)), rng_seed=seed
        )
        # independent pass: replay the layer sequence, checking every
        # non-first-layer seed against a recomputed cell error map
        canvas = None
        for layer_index, spec in enumerate(config.layers):
            reference = gaussian_blur(img, float(spec.radius))
            if layer_index > 0:
                step = max(1, int(round(spec.grid_step_factor * spec.radius)))
                cells = cell_error_map_oracle(canvas, reference, step)
                _, strokes = paint_layer(
                    canvas, reference, spec, BrushModel.CURVED, config, layer_index
                )
                for stroke in strokes:
                    sx, sy = stroke.seed
                    assert cells[(sx // step, sy // step)] > spec.error_threshold
            canvas, _ = paint_layer(
                canvas, reference, spec, BrushModel.CURVED, config, layer_index
            )
        out3, _ = render_painterly(img, config)
        out1, _ = render_painterly(
            img, PainterlyConfig(layers=(LayerSpec(8.0),), rng_seed=seed)
        )
        err3 = float(((out3.data - img.data) ** 2).sum())
        err1 = float(((out1.data - img.data) ** 2).sum())
        assert err3 <= err1, f"3-layer error {err3:.4f} > 1-layer {err1:.4f}"
    report(7, "non-first-layer seeds gated by recomputed cell error; 3-layer error <= 1-layer")


def test_criterion_08_merge_convexity():
    rng = np.random.default_rng(3)
    img = RasterImage(rng.random((64, 64, 3)))
    merge_radius = 8.0
    scalar_attrs = ("x", "y", "length", "thickness", "size", "weight", "priority")
    for _ in range(1000):
        a = random_stroke(rng)
        b = random_stroke(rng)
        b = b.with_fields(
            x=min(max(a.x + float(rng.uniform(-5, 5)), 0.0), 63.0),
            y=min(max(a.y + float(rng.uniform(-5, 5)), 0.0), 63.0),
        )
        m = merge_strokes(a, b, img, merge_radius)
        for attr in scalar_attrs:
            va, vb, vm = getattr(a, attr), getattr(b, attr), getattr(m, attr)
            assert min(va, vb) - 1e-12 <= vm <= max(va, vb) + 1e-12
        for i in range(4):
            lo, hi = sorted((a.color[i], b.color[i]))
            assert lo - 1e-12 <= m.color[i] <= hi + 1e-12
    # omega endpoints: identical patches keep s_a, negated patches keep s_b
    size = 32
    patch = np.linspace(0.1, 0.9, 9)
    data = np.zeros((size, size, 1))
    data[4:13, 4:13, 0] = patch[np.newaxis, :]
    data[18:27, 4:13, 0] = (1.0 - patch)[np.newaxis, :]
    two_tone = RasterImage(data)
    a = random_stroke(np.random.default_rng(4), 32, 32).with_fields(x=8.0, y=8.0)
    b = random_stroke(np.random.default_rng(5), 32, 32).with_fields(x=8.0, y=8.0)
    assert merge_strokes(a, b, two_tone, 1.0) == a  # identical patches, omega = 1
    c = b.with_fields(x=8.0, y=22.0)
    assert merge_strokes(a, c, two_tone, 20.0) == c  # negated patches, omega = 0
    report(8, "1000 merges convex in every scalar field; omega endpoints verified")


def test_criterion_09_discard_monotonicity():
    img = synthetic_photo(5)
    counts = []
    thresholds = np.linspace(-0.2, 0.8, 10)
    for thresh in thresholds:
        settings = PlanSettings(
            candidate_count=40,
            hybrid=HybridParams(q_discard_threshold=float(thresh), stroke_budget=40),
        )
        counts.append(len(plan(img, settings, IdentityRefiner())))
    assert all(a >= b for a, b in zip(counts, counts[1:])), counts
    assert counts[0] > counts[-1], "threshold sweep should actually discard"
    report(9, f"survivor counts non-increasing over 10 thresholds: {counts}")


def test_criterion_10_plan_determinism(tmp_path, photo_path):
    config_doc = {
        "rng_seed": 7,
        "features": {"candidate_count": 120},
        "hybrid": {"stroke_budget": 120},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config_doc))
    outputs = []
    plans = []
    for i in range(2):
        out = tmp_path / f"cli{i}.png"
        plan_file = tmp_path / f"cli{i}.json"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "strokeforge",
                "plan",
                photo_path,
                str(out),
                "--config",
                str(cfg_path),
                "--strokes-out",
                str(plan_file),
            ],
            capture_output=True,
        )
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(out.read_bytes())
        plans.append(plan_file.read_bytes())
    assert outputs[0] == outputs[1]
    assert plans[0] == plans[1]

    client = TestClient(create_app())
    with open(photo_path, "rb") as fh:
        blob = fh.read()
    r = client.post(
        "/api/jobs",
        files={"image": ("photo.png", blob, "image/png")},
        data={"config": json.dumps(config_doc)},
    )
    job_id = r.json()["id"]
    deadline = time.time() + 60
    while time.time() < deadline:
        state = client.get(f"/api/jobs/{job_id}").json()["state"]
        if state in ("done", "failed"):
            break
        time.sleep(0.05)
    assert state == "done"
    assert client.get(f"/api/jobs/{job_id}/result.png").content == outputs[0]
    assert client.get(f"/api/jobs/{job_id}/strokes").content == plans[0]
    report(10, "two CLI runs and one HTTP run byte-identical (PNG and plan JSON)")


def test_criterion_11_codec_round_trips():
    rng = np.random.default_rng(6)
    cases = 0
    # stroke-plan corpus: boundary angles and extreme floats included
    special = [
        Stroke(1.0, 2.0, math.pi, 3.0, 1.0, (0, 0, 0, 1)),
        Stroke(1.0, 2.0, -math.pi, 3.0, 1.0, (0, 0, 0, 1)),  # normalizes to +pi
        Stroke(1.0, 2.0, math.nextafter(-math.pi, 0.0), 3.0, 1.0, (0, 0, 0, 1)),
        Stroke(0.0, 0.0, 0.0, 1e308, 5e-324, (1, 1, 1, 1), weight=1e-300),
        Stroke(0.0, 0.0, 0.0, 0.0, 2.2250738585072014e-308, (0.5, 0.5, 0.5, 0.5)),
    ]
    for i in range(25):
        strokes = [random_stroke(rng) for _ in range(int(rng.integers(1, 30)))]
        if i < len(special):
            strokes.append(special[i])
        back, dims = parse_plan(serialize_plan(strokes, (64, 64)))
        assert back == strokes and dims == (64, 64)
        cases += 1
    config_corpus = [
        {},
        {"rng_seed": 2**62},
        {"hybrid": {"blend_gamma": 0.0}},
        {"hybrid": {"blend_gamma": 1.0}},
        {"hybrid": {"q_discard_threshold": -1e308}},
        {"features": {"alpha_e": 5e-324, "beta_s": 1.0}},
        {"stylize": {"eta": 1e-9, "iterations": 0}},
        {"painterly": {"layers": [{"radius": 64.0}, {"radius": 1.0}]}},
        {"render": {"background": [0.0, 0.0, 0.0, 0.0]}},
        {"render": {"post": {"edge_enhance_amount": -3.5}}},
        {"strokes": {"scale_at_full_density": 2.0}},
        {"exclusions": {"plan_hash": "f" * 64, "indices": list(range(20))}},
    ] + [
        {
            "rng_seed": int(rng.integers(0, 2**31)),
            "hybrid": {
                "blend_gamma": float(rng.random()),
                "merge_radius": float(rng.uniform(0, 50)),
            },
            "features": {"candidate_count": int(rng.integers(1, 5000))},
        }
        for _ in range(13)
    ]
    for doc in config_corpus:
        cfg = config_from_dict(doc)
        text = config_to_json(cfg)
        again = parse_config(text)
        assert again == cfg
        assert config_to_json(again) == text
        cases += 1
    assert cases == 50
    report(11, f"{cases} codec cases round-trip field-exactly (plans and configs)")


def test_criterion_12_refiner_never_regresses():
    # two-tone image: left dark, right bright
    size = 32
    data = np.zeros((size, size, 3))
    data[:, size // 2 :] = 0.85
    data[:, : size // 2] = 0.15
    img = RasterImage(data)
    rgb = img.rgb()
    z = np.zeros((size, size))
    bundle = FeatureBundle(
        edges=ScalarField(z), saliency=ScalarField(z), density=ScalarField(z)
    )
    refiner = LocalSearchRefiner()
    rng = np.random.default_rng(8)

    def oracle_error(stroke):
        # direct footprint evaluation, independent of the library path
        half = stroke.length / 2.0
        ax = stroke.x - half * math.cos(stroke.orientation)
        ay = stroke.y - half * math.sin(stroke.orientation)
        bx = stroke.x + half * math.cos(stroke.orientation)
        by = stroke.y + half * math.sin(stroke.orientation)
        num = den = 0.0
        for y in range(size):
            for x in range(size):
                ex, ey = bx - ax, by - ay
                seg2 = ex * ex + ey * ey
                if seg2 == 0:
                    d = math.hypot(x - ax, y - ay)
                else:
                    t = min(max(((x - ax) * ex + (y - ay) * ey) / seg2, 0.0), 1.0)
                    d = math.hypot(x - (ax + t * ex), y - (ay + t * ey))
                cov = min(max(stroke.thickness / 2.0 + 0.5 - d, 0.0), 1.0)
                if cov > 0:
                    num += cov * sum((rgb[y, x, c] - stroke.color[c]) ** 2 for c in range(3))
                    den += cov
        if den == 0.0:
            ix = min(max(int(math.floor(stroke.x + 0.5)), 0), size - 1)
            iy = min(max(int(math.floor(stroke.y + 0.5)), 0), size - 1)
            return sum((rgb[iy, ix, c] - stroke.color[c]) ** 2 for c in range(3))
        return num / den

    for _ in range(200):
        stroke = Stroke(
            x=float(rng.uniform(1, size - 2)),
            y=float(rng.uniform(1, size - 2)),
            orientation=float(rng.uniform(-math.pi, math.pi)),
            length=float(rng.uniform(1, 10)),
            thickness=float(rng.uniform(0.5, 5)),
            color=tuple(rng.random(3)) + (1.0,),
        )
        refined = refiner.refine(stroke, img, bundle)
        assert oracle_error(refined) <= oracle_error(stroke) + 1e-12
    report(12, "local-search refiner never increased footprint error over 200 strokes")
