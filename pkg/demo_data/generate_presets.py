#!/usr/bin/env python3
"""
Preset Generator for the PME toolkit

Writes the two built-in studies as plain files so they can be run through
``--config`` like any user study:
- airfoil-bezier14: 14-variable Bezier airfoil on a NACA 0012 baseline
- hull-ffd22: 22-variable FFD lattice on the demo demi-hull

Each preset gets a parameterization spec JSON, a geometry file and a pipeline
config that references both by relative path and records their SHA-256 hashes.
"""

import json
import os
import sys

# Add parent directory to path to import modules
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(parent_dir)

# Change working directory to parent to ensure relative paths work correctly
os.chdir(parent_dir)

from cli.pipeline import file_digest
from cli.presets import PRESETS, build_preset
from config import settings
from geometry.io import write_geometry
from parameterization.spec import save_spec


class PresetGenerator:
    """Writes spec, geometry and config files for every preset."""

    def __init__(self, target_dir=settings.PRESET_DIR):
        self.target_dir = target_dir

    def write_preset(self, name):
        """Write the three files of one preset and return the config path."""
        spec, baseline = build_preset(name)
        defaults = PRESETS[name]

        spec_file = f"{name}.spec.json"
        geometry_file = f"{name}.geo"
        save_spec(spec, os.path.join(self.target_dir, spec_file))
        write_geometry(baseline, os.path.join(self.target_dir, geometry_file))

        config = {
            "parameterization": spec_file,
            "geometry": geometry_file,
            "samples": defaults["samples"],
            "seed": settings.SEED,
            "confidence": defaults["confidence"],
            "measures": "file",
            "weights": "file",
            "mirrored": baseline.mirrored,
            "optimizer": dict(defaults["optimizer"]),
            "output_dir": os.path.join("..", "..", "runs", name),
            "hashes": {
                "parameterization": file_digest(os.path.join(self.target_dir, spec_file)),
                "geometry": file_digest(os.path.join(self.target_dir, geometry_file)),
            },
        }
        if baseline.waterline is not None:
            config["waterline"] = baseline.waterline

        config_path = os.path.join(self.target_dir, f"{name}.json")
        with open(config_path, "w", newline="\n") as f:
            json.dump(config, f, indent=2, sort_keys=True)
            f.write("\n")

        print(f"  📐 {name}: M = {spec.M}, L = {baseline.size}, topology {baseline.topology}")
        return config_path

    def generate(self):
        os.makedirs(self.target_dir, exist_ok=True)
        print(f"📁 Writing presets to {self.target_dir}")
        return [self.write_preset(name) for name in sorted(PRESETS)]


def main():
    """Main function to run the preset generator."""
    print("🚀 PME Toolkit - Preset Generator")
    print("=" * 60)

    try:
        paths = PresetGenerator().generate()

        print(f"\n✨ Preset generation completed!")
        print(f"📖 Run a study with:")
        for path in paths:
            print(f"   python main.py sample --config {os.path.relpath(path)}")

    except KeyboardInterrupt:
        print(f"\n⚠️  Operation cancelled by user")
    except Exception as e:
        print(f"\n❌ Error: {e}")
        return 1

    return 0


if __name__ == "__main__":
    exit(main())
