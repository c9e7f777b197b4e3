import json

import pytest

from strokeforge.config import (
    ConfigError,
    PlanConfig,
    config_from_dict,
    config_to_dict,
    config_to_json,
    load_config,
    parse_config,
    save_config,
)
from strokeforge.painterly import BrushModel


class TestDefaults:
    def test_empty_object_is_full_default(self):
        cfg = config_from_dict({})
        assert cfg == PlanConfig()

    def test_default_config_is_valid(self):
        # a default-constructed config passes all invariants and serializes
        cfg = PlanConfig()
        text = config_to_json(cfg)
        assert parse_config(text) == cfg

    def test_every_field_has_default(self):
        doc = config_to_dict(config_from_dict({}))
        assert set(doc) == {
            "rng_seed",
            "refiner",
            "brush",
            "features",
            "strokes",
            "painterly",
            "hybrid",
            "stylize",
            "render",
            "exclusions",
        }


class TestValidation:
    def test_range_violation_names_pointer(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"hybrid": {"blend_gamma": 1.5}})
        assert err.value.pointer == "/hybrid/blend_gamma"

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"hybrid": {"blend_gama": 0.5}})
        assert "blend_gama" in str(err.value)

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"mystery": 1})
        assert err.value.pointer == "/mystery"

    def test_type_mismatch(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"features": {"alpha_e": "high"}})
        assert err.value.pointer == "/features/alpha_e"

    def test_boolean_is_not_a_number(self):
        with pytest.raises(ConfigError):
            config_from_dict({"features": {"alpha_e": True}})

    def test_layer_radii_must_decrease(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict(
                {"painterly": {"layers": [{"radius": 2.0}, {"radius": 8.0}]}}
            )
        assert err.value.pointer == "/painterly/layers"

    def test_nested_layer_pointer(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"painterly": {"layers": [{"radius": 0.0}]}})
        assert err.value.pointer == "/painterly/layers/0/radius"

    def test_refiner_choice(self):
        with pytest.raises(ConfigError):
            config_from_dict({"refiner": "deep_net"})
        cfg = config_from_dict({"refiner": "identity"})
        assert cfg.refiner == "identity"

    def test_exclusions_shape(self):
        cfg = config_from_dict({"exclusions": {"plan_hash": "abc", "indices": [1, 2]}})
        assert cfg.exclusions.indices == (1, 2)
        with pytest.raises(ConfigError):
            config_from_dict({"exclusions": {"plan_hash": "abc", "indices": [-1]}})
        with pytest.raises(ConfigError):
            config_from_dict({"exclusions": {"plan_hash": "abc"}})

    def test_render_background_components(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"render": {"background": [0.5, 0.5, 0.5]}})
        assert err.value.pointer == "/render/background"
        with pytest.raises(ConfigError) as err:
            config_from_dict({"render": {"background": [0.5, 0.5, 0.5, 2.0]}})
        assert err.value.pointer == "/render/background/3"


class TestRoundTrip:
    CASES = [
        {},
        {"rng_seed": 123456789},
        {"brush": "triangle", "refiner": "identity"},
        {"features": {"alpha_e": 0.25, "candidate_count": 17}},
        {"hybrid": {"blend_gamma": 0.0}},
        {"hybrid": {"blend_gamma": 1.0, "merge_radius": 0.0}},
        {"painterly": {"layers": [{"radius": 16.0}], "quantize_levels": 4}},
        {"stylize": {"eta": 0.001, "iterations": 0, "init": "noise", "noise_seed": 9}},
        {"render": {"post": {"denoise_radius": 2.5, "harmonize_strength": 1.0}}},
        {"strokes": {"base_size": 0.125, "texture": "hatch", "follow_contours": False}},
        {"exclusions": {"plan_hash": "00ff", "indices": [0, 5, 9]}},
        {"features": {"beta_s": 1e-9}},
        {"hybrid": {"q_discard_threshold": -1e300}},
        {"strokes": {"base_length": 0.0}},
    ]

    @pytest.mark.parametrize("case", CASES)
    def test_save_load_fixpoint(self, case, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(case))
        cfg = load_config(str(path))
        out = tmp_path / "saved.json"
        save_config(cfg, str(out))
        again = load_config(str(out))
        assert again == cfg
        # canonical form is a fixpoint of save(load(.))
        out2 = tmp_path / "saved2.json"
        save_config(again, str(out2))
        assert out.read_bytes() == out2.read_bytes()

    def test_field_exact_floats(self, tmp_path):
        case = {"hybrid": {"blend_gamma": 0.1234567890123456789}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(case))
        cfg = load_config(str(path))
        assert cfg.hybrid.blend_gamma == 0.1234567890123456789

    def test_plan_settings_projection(self):
        cfg = config_from_dict({"features": {"candidate_count": 33}, "rng_seed": 5})
        settings = cfg.plan_settings()
        assert settings.candidate_count == 33
        assert settings.rng_seed == 5
        assert settings.hybrid == cfg.hybrid

    def test_brush_enum_round_trip(self):
        for brush in BrushModel:
            cfg = config_from_dict({"brush": brush.value})
            assert config_to_dict(cfg)["brush"] == brush.value
