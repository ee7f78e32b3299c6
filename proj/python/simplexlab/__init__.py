"""Lower bounds, optimisers and geometry diagnostics for cross-entropy and
supervised contrastive losses on free representations.

Labels are 0-based integer sequences. Matrices are NumPy arrays with one row
per point.
"""

from ._core import (
    BudgetExceeded,
    ParseError,
    batches,
    build_simplex,
    ce_bound_frobenius,
    ce_bound_l2,
    ce_bound_rw,
    ce_gradients,
    ce_loss,
    census,
    class_means,
    collapsed_config,
    cosine_similarity,
    equality_report_ce,
    equality_report_sc,
    geometry_stats,
    k_factor,
    load_embeddings,
    multichoose,
    optimize_ce,
    optimize_sc,
    optimize_single_batch,
    project_to_ball,
    project_to_sphere,
    random_sphere_config,
    rank_batch,
    sc_batch_loss,
    sc_bound,
    sc_gradient,
    sc_total_loss,
    simplex_similarity,
    solve_r_w,
    unrank_batch,
    verify_simplex,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
