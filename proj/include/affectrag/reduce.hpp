#pragma once

#include <filesystem>

#include "affectrag/matrix.hpp"

namespace affectrag {

// Principal-component model fitted on N x d data. Components are stored as a
// k x d matrix with orthonormal rows ordered by non-increasing explained
// variance (sample covariance, 1/(N-1)). Each component's largest-magnitude
// entry is made positive so identical input reproduces identical models.
struct PcaModel {
    size_t input_width = 0;  // d
    size_t k = 0;
    size_t fitted_on = 0;  // N
    std::vector<double> mean;
    MatrixD components;                      // k x d
    std::vector<double> explained_variance;  // length k, non-increasing

    // (rows - mean) . components^T  ->  m x k
    MatrixD transform(const MatrixD& rows) const;
    // rows . components + mean  ->  m x d
    MatrixD inverse_transform(const MatrixD& rows) const;

    MatrixF transform(const MatrixF& rows) const;

    void check() const;  // orthonormality, variance ordering

    void save(const std::filesystem::path& path, uint64_t config_hash = 0) const;
    static PcaModel load(const std::filesystem::path& path, uint64_t* config_hash = nullptr);
};

// Fits the top-k variance subspace of the centered data. Uses the d x d
// covariance eigendecomposition when d <= N and the N x N Gram matrix
// otherwise (same spectrum, much cheaper for wide embeddings). Requires
// N >= 2 and k <= min(N-1, d); rank-deficient input succeeds with trailing
// explained variance ~ 0 and a warning on stderr.
PcaModel fit_pca(const MatrixD& data, size_t k);

}  // namespace affectrag
