"""Linearized diffusion maps and PCA as matrix-free linear embeddings."""

__version__ = "0.1.0"

from ldm.ann import NeighborList, exact_knn, knn_in_embedding, recall_at_k
from ldm.embed import (
    Embedding,
    diffusion_distance_oracle,
    fit_ldm,
    fit_pca,
    stationary_distribution,
    transition_matrix_dense,
)
from ldm.kernels import (
    KernelParams,
    default_epsilon,
    double_center,
    ldm_degrees,
    ldm_operator,
    linearized_rbf_dense,
    mds_kernel_dense,
    pca_operator,
    rbf_kernel_dense,
)
from ldm.linalg import (
    EigenResult,
    MatrixFreeOperator,
    dense_eig_symmetric,
    lanczos_symmetric,
    pairwise_sq_dist,
    row_norms_sq,
)
