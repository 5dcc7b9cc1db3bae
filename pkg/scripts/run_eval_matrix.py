#!/usr/bin/env python3
"""Run the engine x persona evaluation matrix on the bundled fixtures and
print a coverage table.

Usage:
    python3 scripts/run_eval_matrix.py [--seed N] [--out report.json]

Everything runs against the deterministic mock gateway; rerunning with
the same seed reproduces the table byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from reviver.baseline import prepare_descriptions  # noqa: E402
from reviver.eval_harness import UserScript, run_scripted_session  # noqa: E402
from reviver.gateway import MockBackend, ModelGateway, load_annotations  # noqa: E402
from reviver.persistence import load_manifest  # noqa: E402
from reviver.service import MOCK_BUILT_AT  # noqa: E402
from reviver.tree_builder import build_memory_tree  # noqa: E402

COLLECTIONS = ["trip", "contrast", "single"]
PERSONAS = ["compliant", "curious", "scene_hopper", "silent_quitter"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    rows = []
    for name in COLLECTIONS:
        base = ROOT / "tests" / "fixtures" / "collections" / name
        manifest = load_manifest(base / "manifest.json")
        annotations = load_annotations(base / "manifest.annotations.json")

        def gateway() -> ModelGateway:
            return ModelGateway(MockBackend(annotations))

        tree = build_memory_tree(manifest, gateway(), built_at=MOCK_BUILT_AT)
        for engine in ("reviver", "baseline"):
            if engine == "baseline":
                prepare_descriptions(manifest, gateway())
            for persona in PERSONAS:
                script = UserScript(persona=persona, max_turns=60)
                _, metrics = run_scripted_session(
                    engine, script, gateway(), tree=tree, manifest=manifest, seed=args.seed
                )
                rows.append(
                    {
                        "collection": name,
                        "engine": engine,
                        "persona": persona,
                        "scene_coverage": metrics.scene_coverage,
                        "concluded": metrics.concluded,
                        "bot_turns": metrics.bot_turn_count,
                        "details_emitted": len(metrics.emitted_detail_ids),
                    }
                )

    header = f"{'collection':<10} {'engine':<9} {'persona':<14} {'coverage':>8} {'concluded':>9} {'turns':>5}"
    print(header)
    print("-" * len(header))
    for row in rows:
        coverage = f"{row['scene_coverage']:.2f}" if row["scene_coverage"] is not None else "n/a"
        print(
            f"{row['collection']:<10} {row['engine']:<9} {row['persona']:<14} "
            f"{coverage:>8} {str(row['concluded']):>9} {row['bot_turns']:>5}"
        )
    if args.out:
        args.out.write_text(json.dumps({"seed": args.seed, "rows": rows}, indent=2) + "\n", encoding="utf-8")
        print(f"\nreport written to {args.out}")


if __name__ == "__main__":
    main()
