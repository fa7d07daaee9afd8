import pytest

from parameterization.bezier import make_bezier_airfoil
from schemas.validator import SchemaValidator, validator


class TestSchemaValidator:
    def test_all_schemas_load(self):
        assert set(SchemaValidator().schemas) == {"parameterization_spec", "pipeline_config", "optimizer_config"}

    def test_unknown_schema(self):
        assert validator.validate_document({}, "hull_lines") == "Unknown schema: hull_lines"

    def test_spec_document(self):
        spec, _ = make_bezier_airfoil()
        assert validator.validate_parameterization_spec(spec.to_dict()) is None

    def test_spec_missing_block(self):
        error = validator.validate_parameterization_spec({
            "kind": "bezier-airfoil",
            "active": [{"i": 3, "j": 1, "k": 1, "dof": 2, "lower": -0.9, "upper": 0.9}],
        })
        assert error is not None and "bezier" in error

    @pytest.mark.parametrize("document", [
        {"preset": "airfoil-bezier14"},
        {"parameterization": "a.spec.json", "geometry": "a.geo", "samples": 50, "confidence": 1.0},
    ])
    def test_valid_pipeline_configs(self, document):
        assert validator.validate_pipeline_config(document) is None

    @pytest.mark.parametrize("document", [
        {},
        {"geometry": "a.geo"},
        {"preset": "wing"},
        {"preset": "hull-ffd22", "confidence": 0.0},
        {"preset": "hull-ffd22", "hashes": {"geometry": "abc"}},
    ])
    def test_invalid_pipeline_configs(self, document):
        assert validator.validate_pipeline_config(document) is not None

    def test_error_names_location(self):
        error = validator.validate_pipeline_config({"preset": "hull-ffd22", "samples": "many"})
        assert error.startswith("Validation error at samples")

    def test_optimizer_block(self):
        assert validator.validate_optimizer_config({"budget": 500, "spaces": ["pme", "kle"], "polish": True}) is None
        assert validator.validate_optimizer_config({"spaces": ["pme", "pme"]}) is not None
        assert validator.validate_optimizer_config({"penalty_c": 0}) is not None
        assert validator.validate_optimizer_config({"swarm": 10}) is not None

    @pytest.mark.parametrize("levels, valid", [
        ([0.05, 0.075, 0.1], True),
        ([], False),
        ([0.0], False),
        ([1.0], False),
        ([0.1, 0.1], False),
    ])
    def test_drop_levels(self, levels, valid):
        assert (validator.validate_optimizer_config({"drop_levels": levels}) is None) == valid
