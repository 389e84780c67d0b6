"""Linguistic geometries for document visualization.

Build word-similarity transforms (manual specs, corpus diffusion, n-gram
statistics, taxonomies), apply them to term-frequency vectors, reduce to 2-D
with PCA or t-SNE, and score the separation of labeled groups.
"""
from .corpus import (DocumentMatrix, PreprocessConfig, RawDocument, TermCounts,
                     Vocabulary, build_vocabulary, count_matrix, preprocess, tokenize)
from .diffusion import (ContextualTable, DiffusionConfig, NgramTable,
                        contextual_distributions, diffusion_kernel, hellinger_affinity,
                        ngram_contextual_distributions)
from .evaluate import (EvaluationReport, LabeledEmbedding, davies_bouldin,
                       evaluate_embedding, intra_inter, knn_accuracy, lda_overlap,
                       scatter_matrices, search_convex_combination)
from .geometry import (CombinationWeights, DiagonalWeights, GeometryParams,
                       ManualGeometrySpec, MarkovMatrix, SimilarityMatrix,
                       SoftScoreSpec, TransformMatrix, WordClustering,
                       build_manual_D, build_manual_R, build_soft_R, compose_H,
                       convex_combination, distance, factorize_T, transform)
from .pipeline import PipelineConfig, run_pipeline
from .reduce import Embedding2D, PointCloud, TsneConfig, pca, perplexity_calibration, tsne
from .taxonomy import (ConceptProbabilities, Taxonomy, concept_probabilities,
                       jiang_conrath, lcs, taxonomy_similarity_matrix)

__version__ = "0.1.0"
