"""Deterministic synthetic corpora for experiments and the acceptance suite.

Documents mix a high-variance background (each document draws most tokens
from its own small random subset of background words) with a thinner stream
of class-bearing words. Euclidean reduction latches onto the background
noise; the point of the generated worlds is that geometry construction has
signal to recover. Tokens are Porter-stemming fixed points so geometry spec
files match the pipeline vocabulary exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import RawDocument
from .geometry import ManualGeometrySpec
from .stemming import porter_stem

_ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z",
           "br", "dr", "gr", "kl", "pl", "tr", "st", "sk"]
_NUCLEI = ["a", "e", "i", "o", "u", "ai", "ea", "ou", "io"]


def make_words(rng: np.random.Generator, count: int, used: set[str]) -> list[str]:
    """Pronounceable pseudo-words that Porter stemming leaves unchanged."""
    words = []
    while len(words) < count:
        n_syll = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))]
                    + _NUCLEI[rng.integers(len(_NUCLEI))]
                    for _ in range(n_syll))
        w += _ONSETS[rng.integers(len(_ONSETS))][0]
        if w in used or porter_stem(w) != w:
            continue
        used.add(w)
        words.append(w)
    return words


@dataclass(frozen=True)
class SyntheticWorld:
    docs: list[RawDocument]
    estimation_docs: list[RawDocument]
    pools: dict[str, list[str]]
    manual_spec: ManualGeometrySpec
    ngram_lines: list[str] | None = None
    taxonomy_lines: list[str] | None = None


def _draw_doc(rng: np.random.Generator, background: list[str], class_pools: list[list[str]],
              own: int, n_background: int, n_class: int, active_bg: int,
              purity: float) -> list[str]:
    active = rng.choice(len(background), size=active_bg, replace=False)
    tokens = [background[i] for i in rng.choice(active, size=n_background)]
    others = [i for i in range(len(class_pools)) if i != own]
    for _ in range(n_class):
        if rng.random() < purity or not others:
            pool = class_pools[own]
        else:
            pool = class_pools[others[rng.integers(len(others))]]
        tokens.append(pool[rng.integers(len(pool))])
    perm = rng.permutation(len(tokens))
    return [tokens[i] for i in perm]


def sentiment_world(n_docs: int = 240, n_estimation: int = 260,
                    seed: int = 20090217, n_background: int = 160,
                    pool_size: int = 30, bg_tokens: int = 60,
                    class_tokens: int = 24, active_bg: int = 10,
                    purity: float = 0.85) -> SyntheticWorld:
    """Two-class review-like corpus plus a held-out estimation corpus drawn
    from the same process, and the matching sentiment-lexicon manual spec."""
    rng = np.random.default_rng(seed)
    used: set[str] = set()
    positive = make_words(rng, pool_size, used)
    negative = make_words(rng, pool_size, used)
    background = make_words(rng, n_background, used)
    class_pools = [positive, negative]
    names = ["positive", "negative"]

    def gen(count: int, tag: str) -> list[RawDocument]:
        docs = []
        for i in range(count):
            label = int(rng.random() < 0.5)
            tokens = _draw_doc(rng, background, class_pools, label,
                               bg_tokens, class_tokens, active_bg, purity)
            docs.append(RawDocument(id=f"{tag}-{i:04d}", text=" ".join(tokens),
                                    label=names[label]))
        return docs

    docs = gen(n_docs, "rev")
    estimation = gen(n_estimation, "est")
    spec = ManualGeometrySpec(
        clusters={"positive": tuple(positive), "negative": tuple(negative),
                  "neutral": ()},
        rho_self={"positive": 0.8, "negative": 0.8, "neutral": 1.0},
        importance={"positive": 5.0, "negative": 5.0, "neutral": 0.5},
        rho_pairs={("positive", "positive"): 0.2, ("negative", "negative"): 0.2},
        default_cluster="neutral",
    )
    pools = {"positive": positive, "negative": negative, "background": background}
    return SyntheticWorld(docs=docs, estimation_docs=estimation, pools=pools,
                          manual_spec=spec)


def topical_world(n_docs: int = 300, n_estimation: int = 300,
                  seed: int = 20100101, n_background: int = 150,
                  pool_size: int = 36, bg_tokens: int = 55,
                  class_tokens: int = 25, active_bg: int = 10,
                  purity: float = 0.8, grams_per_topic: int = 400,
                  bg_grams: int = 600) -> SyntheticWorld:
    """Three-topic corpus plus trigram counts and an is-a taxonomy that both
    encode the topical word pools."""
    rng = np.random.default_rng(seed)
    used: set[str] = set()
    topics = ["alpha", "beta", "gamma"]
    class_pools = [make_words(rng, pool_size, used) for _ in topics]
    background = make_words(rng, n_background, used)

    def gen(count: int, tag: str) -> list[RawDocument]:
        docs = []
        for i in range(count):
            label = int(rng.integers(len(topics)))
            tokens = _draw_doc(rng, background, class_pools, label,
                               bg_tokens, class_tokens, active_bg, purity)
            docs.append(RawDocument(id=f"{tag}-{i:04d}", text=" ".join(tokens),
                                    label=topics[label]))
        return docs

    docs = gen(n_docs, "art")
    estimation = gen(n_estimation, "est")

    ngram_lines = []
    for pool in class_pools:
        for _ in range(grams_per_topic):
            gram = [pool[rng.integers(len(pool))] for _ in range(3)]
            count = int(rng.integers(1, 20))
            ngram_lines.append(" ".join(gram) + f"\t{count}")
    for _ in range(bg_grams):
        gram = [background[rng.integers(len(background))] for _ in range(3)]
        count = int(rng.integers(1, 40))
        ngram_lines.append(" ".join(gram) + f"\t{count}")

    taxonomy_lines = ["concept root", "concept general", "isa general root"]
    for t, pool in zip(topics, class_pools):
        taxonomy_lines.append(f"concept topic_{t}")
        taxonomy_lines.append(f"isa topic_{t} root")
        thirds = np.array_split(np.arange(len(pool)), 3)
        for s, third in enumerate(thirds):
            sub = f"sub_{t}_{s}"
            taxonomy_lines.append(f"concept {sub}")
            taxonomy_lines.append(f"isa {sub} topic_{t}")
            for j in third:
                taxonomy_lines.append(f"member {pool[j]} {sub}")
    for w in background:
        taxonomy_lines.append(f"member {w} general")

    spec = ManualGeometrySpec(
        clusters={t: tuple(pool) for t, pool in zip(topics, class_pools)}
        | {"general": ()},
        rho_self={**{t: 0.8 for t in topics}, "general": 1.0},
        importance={**{t: 4.0 for t in topics}, "general": 0.5},
        rho_pairs={(t, t): 0.2 for t in topics},
        default_cluster="general",
    )
    pools = {t: p for t, p in zip(topics, class_pools)} | {"background": background}
    return SyntheticWorld(docs=docs, estimation_docs=estimation, pools=pools,
                          manual_spec=spec, ngram_lines=ngram_lines,
                          taxonomy_lines=taxonomy_lines)


def write_jsonl(docs: list[RawDocument], path: str | Path) -> None:
    import json
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            rec = {"id": d.id, "text": d.text}
            if d.label is not None:
                rec["label"] = d.label
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def write_world(world: SyntheticWorld, outdir: str | Path) -> dict[str, str]:
    """Materialize a world for CLI / service use; returns the path map."""
    import json

    from .geometry import geometry_spec_to_json

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    write_jsonl(world.docs, out / "corpus.jsonl")
    paths["corpus"] = str(out / "corpus.jsonl")
    write_jsonl(world.estimation_docs, out / "estimation.jsonl")
    paths["estimation_corpus"] = str(out / "estimation.jsonl")
    (out / "manual_spec.json").write_text(
        json.dumps(geometry_spec_to_json(world.manual_spec), indent=2) + "\n",
        encoding="utf-8")
    paths["manual_spec"] = str(out / "manual_spec.json")
    if world.ngram_lines is not None:
        (out / "ngrams.tsv").write_text("\n".join(world.ngram_lines) + "\n",
                                        encoding="utf-8")
        paths["ngram_file"] = str(out / "ngrams.tsv")
    if world.taxonomy_lines is not None:
        (out / "taxonomy.txt").write_text("\n".join(world.taxonomy_lines) + "\n",
                                          encoding="utf-8")
        paths["taxonomy_file"] = str(out / "taxonomy.txt")
    return paths
