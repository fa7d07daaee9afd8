"""
JSON Schema validation for specs and run configurations
"""
import json
import jsonschema
import os
from typing import Dict, Any, Optional
import logging

logger = logging.getLogger(__name__)

class SchemaValidator:
    def __init__(self):
        self.schemas = {}
        self._load_schemas()

    def _load_schemas(self):
        """Load all JSON schemas from the schemas directory"""
        schema_dir = os.path.dirname(__file__)
        schema_files = {
            "parameterization_spec": "parameterization_spec.json",
            "pipeline_config": "pipeline_config.json",
            "optimizer_config": "optimizer_config.json"
        }

        for schema_name, file_name in schema_files.items():
            schema_path = os.path.join(schema_dir, file_name)
            try:
                with open(schema_path, 'r') as f:
                    self.schemas[schema_name] = json.load(f)
                logger.debug(f"Loaded schema: {schema_name}")
            except Exception as e:
                logger.error(f"Failed to load schema {schema_name}: {e}")

    def validate_document(self, document: Dict[str, Any], schema_name: str) -> Optional[str]:
        """
        Validate a JSON document against a schema

        Args:
            document: The parsed JSON document
            schema_name: Name of the schema to validate against

        Returns:
            None if valid, error message if invalid
        """
        if schema_name not in self.schemas:
            return f"Unknown schema: {schema_name}"

        try:
            jsonschema.validate(document, self.schemas[schema_name])
            return None
        except jsonschema.ValidationError as e:
            location = "/".join(str(p) for p in e.absolute_path) or "<root>"
            return f"Validation error at {location}: {e.message}"
        except Exception as e:
            return f"Schema validation failed: {e}"

    def validate_parameterization_spec(self, document: Dict[str, Any]) -> Optional[str]:
        """Validate a parameterization spec (Bezier airfoil or FFD lattice)"""
        return self.validate_document(document, "parameterization_spec")

    def validate_pipeline_config(self, document: Dict[str, Any]) -> Optional[str]:
        """Validate a pipeline run configuration"""
        return self.validate_document(document, "pipeline_config")

    def validate_optimizer_config(self, document: Dict[str, Any]) -> Optional[str]:
        """Validate an optimizer configuration block"""
        return self.validate_document(document, "optimizer_config")


# Global validator instance
validator = SchemaValidator()
