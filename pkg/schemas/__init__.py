# JSON Schemas for parameterization specs and run configurations
