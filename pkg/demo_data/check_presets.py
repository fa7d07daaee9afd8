#!/usr/bin/env python3
"""
Smoke check: run every pipeline stage on a small sample of each preset.
"""

import os
import sys
import tempfile

# Add parent directory to path
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(parent_dir)

# Change to parent directory for correct paths
os.chdir(parent_dir)

from cli.pipeline import PipelineRunner, config_from_dict, report
from cli.presets import PRESETS

SMOKE_SAMPLES = 100
SMOKE_BUDGET = 64


def check_preset(name, out_dir):
    """Sample, reduce, embed and optimize one preset at smoke scale."""
    print(f"\n🧪 {name}")
    print("-" * 30)

    document = {
        "preset": name,
        "samples": SMOKE_SAMPLES,
        "output_dir": out_dir,
        "optimizer": {"budget": SMOKE_BUDGET, "polish": False},
    }
    runner = PipelineRunner(config_from_dict(document))

    sampled = runner.sample()
    print(f"✅ Snapshots: {sampled['rows']} x {sampled['S']}, sigma2 = {sampled['sigma2']:.6g}")

    reduced = runner.reduce(1.0)
    print(f"✅ Basis: N = {reduced['N']} of rank {reduced['rank']}, NMSE = {reduced['nmse']:.3g}")

    embedded = runner.embed()
    print(f"✅ Embedding: N = {embedded['N']}, overflow {embedded['overflow']:.1%}")

    results = runner.optimize()
    for space, result in results.items():
        flag = "feasible" if result["final_feasible"] else "infeasible"
        print(f"✅ {space}: best {result['best_objective']:.6g} ({flag}, {result['evaluations']} evaluations)")
    return out_dir


def main():
    print("🧪 Checking presets at smoke scale")
    print("=" * 60)

    try:
        with tempfile.TemporaryDirectory() as root:
            runs = [check_preset(name, os.path.join(root, name)) for name in sorted(PRESETS)]
            print("\n📊 COMPARISON")
            print("-" * 30)
            report(runs, os.path.join(root, "report"))
        print(f"\n🎉 All presets ran end to end")
    except Exception as e:
        print(f"\n❌ Error: {e}")
        return 1

    return 0


if __name__ == "__main__":
    exit(main())
