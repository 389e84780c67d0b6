#!/usr/bin/env python3
"""Generate the demo corpora, geometry specs, n-gram table, and taxonomy under
data/ so the CLI and the studio service have something to chew on."""
import argparse
import json
from pathlib import Path

from lingeo.synth import sentiment_world, topical_world, write_world


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data", help="output directory")
    args = parser.parse_args()
    out = Path(args.out)

    sent_paths = write_world(sentiment_world(), out / "sentiment")
    top_paths = write_world(topical_world(), out / "topics")

    for name, paths, reducer in (("sentiment", sent_paths, "tsne"),
                                 ("topics", top_paths, "tsne")):
        config = {
            "corpus": paths["corpus"],
            "estimation_corpus": paths["estimation_corpus"],
            "geometry": {"method": "manual", "spec_file": paths["manual_spec"]},
            "reducer": reducer,
            "tsne": {"perplexity": 30.0, "iterations": 1000},
            "seed": 7,
            "embedding_out": str(out / name / "embedding.csv"),
            "report_out": str(out / name / "report.json"),
        }
        cfg_path = out / name / "config.json"
        cfg_path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
        print(f"{name}: corpus + specs + config -> {cfg_path}")


if __name__ == "__main__":
    main()
