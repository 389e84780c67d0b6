"""HTTP service for the interactive studio: one session, serialized writes,
content-hash caches so edits recompute only the stages they invalidate.
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import replace
from typing import Any

import numpy as np
from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .corpus import DocumentMatrix
from .evaluate import LabeledEmbedding, evaluate_embedding
from .geometry import (CombinationWeights, ManualGeometrySpec, SoftScoreSpec,
                       TransformMatrix, build_manual_D, build_manual_R,
                       build_manual_geometry, build_soft_geometry,
                       compose_H, convex_combination, parse_geometry_spec)
from .pipeline import (PipelineConfig, PipelineError, build_geometry, load_corpus_file,
                       make_reducer)
from .reduce import Embedding2D, PointCloud
from .geometry import transform


def _spec_hash(obj: Any) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


class Session:
    """Mutable studio state. All writes go through `_locked`; reads see the
    last published (immutable) objects."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.docs: DocumentMatrix = load_corpus_file(
            config.corpus, config.corpus_format, config.preprocessing)
        self._lock = threading.Lock()
        self.revision = 0
        self.history: list[dict] = []
        self._geometry_cache: dict[str, TransformMatrix] = {}
        self._embed_cache: dict[str, tuple[Embedding2D, Any]] = {}
        self.geometry_key: str | None = None
        self.H: TransformMatrix | None = None
        self.summary_extra: dict | None = None
        self.components: list[TransformMatrix] | None = None
        self.alpha: CombinationWeights | None = None
        self.embedding: Embedding2D | None = None
        self.report = None
        self.last_reducer: dict = {"reducer": config.reducer}

        if config.geometry.method == "combine":
            self.components = [build_geometry(c, self.docs, config)
                               for c in config.geometry.components]
            weights = config.geometry.alpha or tuple(
                1.0 / len(self.components) for _ in self.components)
            self._set_alpha_locked(CombinationWeights(weights))
        elif config.geometry.method == "manual" and config.geometry.spec_file:
            from .geometry import load_geometry_spec
            spec = load_geometry_spec(config.geometry.spec_file)
            if not isinstance(spec, ManualGeometrySpec):
                raise ValueError("spec file is not a manual clustering spec")
            clustering = spec.bind(self.docs.vocab)
            params = spec.params()
            R = build_manual_R(clustering, params)
            D = build_manual_D(clustering, params)
            H = compose_H(R, D, provenance="manual")
            self._install_geometry("startup:manual", H,
                                   _cluster_summary(clustering, params, R, D))
        else:
            H = build_geometry(config.geometry, self.docs, config)
            self._install_geometry(f"startup:{config.geometry.method}", H, None)

    # -- internals -----------------------------------------------------------

    def _bump(self, event: str) -> int:
        self.revision += 1
        self.history.append({"revision": self.revision, "event": event})
        return self.revision

    def _install_geometry(self, key: str, H: TransformMatrix,
                          summary: dict | None) -> None:
        self.geometry_key = key
        self.H = H
        self.summary_extra = summary

    def _set_alpha_locked(self, alpha: CombinationWeights) -> None:
        if self.components is None:
            raise ValueError("no component geometries configured")
        if len(alpha) != len(self.components):
            raise ValueError(f"expected {len(self.components)} weights")
        self.alpha = alpha
        H = convex_combination(self.components, alpha)
        key = "alpha:" + ",".join(repr(w) for w in alpha)
        self._install_geometry(key, H, None)

    def _compute_embedding_locked(self, reducer_body: dict) -> bool:
        """Returns True when the result came from cache."""
        cfg = self.config
        name = reducer_body.get("reducer", cfg.reducer)
        if name not in ("pca", "tsne"):
            raise ValueError(f"unknown reducer {name!r}")
        overrides = reducer_body.get("config", {})
        if overrides:
            cfg = replace(cfg, tsne=replace(cfg.tsne, **overrides))
        cfg = replace(cfg, reducer=name)
        key = _spec_hash({"geometry": self.geometry_key, "reducer": name,
                          "config": cfg.tsne.to_dict() if name == "tsne" else {}})
        self.last_reducer = reducer_body
        if key in self._embed_cache:
            self.embedding, self.report = self._embed_cache[key]
            return True
        reducer = make_reducer(cfg)
        points = PointCloud(ids=self.docs.ids,
                            X=transform(self.H, self.docs.terms,
                                        normalize=cfg.tf_normalize))
        emb = reducer(points, self.H.provenance)
        report = None
        if self.docs.labels is not None:
            labeled = LabeledEmbedding(embedding=emb, labels=self.docs.labels)
            report = evaluate_embedding(labeled, k=cfg.knn_k, geometry=self.H.provenance,
                                        reducer=name, seed=cfg.seed)
        self._embed_cache[key] = (emb, report)
        self.embedding, self.report = emb, report
        return False

    # -- write operations ----------------------------------------------------

    def put_spec(self, obj: dict) -> dict:
        spec = parse_geometry_spec(obj)
        key = _spec_hash(obj)
        with self._lock:
            cached = key in self._geometry_cache
            if cached:
                H = self._geometry_cache[key]
                summary = getattr(H, "_studio_summary", None)
            else:
                if isinstance(spec, ManualGeometrySpec):
                    clustering = spec.bind(self.docs.vocab)
                    params = spec.params()
                    R = build_manual_R(clustering, params)
                    D = build_manual_D(clustering, params)
                    H = compose_H(R, D, provenance="manual")
                    summary = _cluster_summary(clustering, params, R, D)
                else:
                    H = build_soft_geometry(spec, self.docs.vocab)
                    summary = {"method": "soft",
                               "clusters": [{"name": n} for n in spec.cluster_names],
                               "rho_self": spec.rho_self}
                H._studio_summary = summary
                self._geometry_cache[key] = H
            self._install_geometry(key, H, summary)
            rev = self._bump("geometry-spec")
            return {"revision": rev, "geometry": H.provenance, "cached": cached,
                    "shape": list(H.shape)}

    def post_embed(self, body: dict) -> dict:
        with self._lock:
            cached = self._compute_embedding_locked(body)
            rev = self._bump("embed")
            return {"revision": rev, "cached": cached}

    def post_alpha(self, weights: list[float]) -> dict:
        with self._lock:
            self._set_alpha_locked(CombinationWeights(weights))
            self._compute_embedding_locked(self.last_reducer)
            rev = self._bump("alpha")
            return {"revision": rev, "alpha": list(self.alpha)}

    # -- read operations -----------------------------------------------------

    def corpus_summary(self) -> dict:
        labels: dict[str, int] = {}
        if self.docs.labels is not None:
            for l in self.docs.labels:
                labels[l] = labels.get(l, 0) + 1
        return {
            "n_docs": self.docs.n_docs,
            "vocab_size": len(self.docs.vocab),
            "has_labels": self.docs.labels is not None,
            "label_counts": dict(sorted(labels.items())),
            "vocab_preview": list(self.docs.vocab.words[:20]),
        }

    def geometry_summary(self) -> dict:
        if self.H is None:
            raise HTTPException(status_code=404, detail="no geometry built yet")
        out = {
            "provenance": self.H.provenance,
            "shape": list(self.H.shape),
            "alpha": list(self.alpha) if self.alpha is not None else None,
            "components": [h.provenance for h in self.components]
            if self.components is not None else None,
        }
        if self.summary_extra:
            out.update(self.summary_extra)
        return out


def _cluster_summary(clustering, params, R, D) -> dict:
    names = clustering.names
    r = len(names)
    block = np.zeros((r, r))
    for a in range(r):
        ia = clustering.members(names[a])
        for b in range(r):
            ib = clustering.members(names[b])
            if ia.size and ib.size:
                block[a, b] = float(R.matrix[np.ix_(ia, ib)].mean())
    clusters = []
    for name in names:
        members = clustering.members(name)
        clusters.append({
            "name": name,
            "size": int(members.size),
            "rho_self": params.rho_self[name],
            "importance": params.importance[name],
            "mean_weight": float(D.weights[members].mean()) if members.size else 0.0,
        })
    return {"method": "manual", "clusters": clusters,
            "block_affinity": block.tolist()}


def create_app(config: PipelineConfig) -> FastAPI:
    app = FastAPI(title="lingeo studio service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    session = Session(config)
    app.state.session = session

    def _domain(fn, *args):
        try:
            return fn(*args)
        except (ValueError, PipelineError) as e:
            raise HTTPException(status_code=422, detail=str(e))

    @app.get("/corpus/summary")
    def corpus_summary():
        return session.corpus_summary()

    @app.put("/geometry/spec")
    def put_spec(body: dict = Body(...)):
        if not isinstance(body, dict) or not ({"clusters", "cluster_names"} & set(body)):
            raise HTTPException(status_code=400,
                                detail="body must be a geometry spec object")
        return _domain(session.put_spec, body)

    @app.get("/geometry/matrix/summary")
    def matrix_summary():
        return session.geometry_summary()

    @app.post("/embed")
    def post_embed(body: dict = Body(default={})):
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be an object")
        if "config" in body and not isinstance(body["config"], dict):
            raise HTTPException(status_code=400, detail="config must be an object")
        from .reduce import TsneConfig
        unknown = set(body.get("config", {})) - set(TsneConfig().to_dict())
        if unknown:
            raise HTTPException(status_code=400,
                                detail=f"unknown reducer config keys: {sorted(unknown)}")
        return _domain(session.post_embed, body)

    @app.get("/embedding")
    def get_embedding():
        if session.embedding is None:
            raise HTTPException(status_code=404, detail="no embedding computed yet")
        emb = session.embedding
        return {
            "ids": list(emb.ids),
            "points": [[float(x), float(y)] for x, y in emb.coords],
            "labels": list(session.docs.labels) if session.docs.labels else None,
            "provenance": emb.provenance,
            "revision": session.revision,
        }

    @app.get("/report")
    def get_report():
        if session.report is None:
            raise HTTPException(status_code=404, detail="no report computed yet")
        return {"report": session.report.to_json(), "revision": session.revision}

    @app.post("/alpha")
    def post_alpha(body: dict = Body(...)):
        if not isinstance(body, dict) or "weights" not in body \
                or not isinstance(body["weights"], list):
            raise HTTPException(status_code=400, detail="body must carry weights: [..]")
        return _domain(session.post_alpha, [float(w) for w in body["weights"]])

    @app.get("/revisions")
    def revisions():
        return {"revision": session.revision, "history": session.history[-50:]}

    return app
