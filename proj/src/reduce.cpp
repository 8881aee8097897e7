#include "affectrag/reduce.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>

#include "affectrag/util.hpp"

namespace affectrag {

using EMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<const EMatrix>;

static constexpr std::string_view kPcaMagic = "ARGPCA01";
static constexpr uint32_t kPcaVersion = 1;

PcaModel fit_pca(const MatrixD& data, size_t k) {
    const size_t n = data.rows, d = data.cols;
    if (n < 2) throw DataError("pca fit needs at least 2 samples");
    if (k == 0 || k > std::min(n - 1, d)) {
        throw DataError("pca k=" + std::to_string(k) + " exceeds min(N-1, d) = " +
                        std::to_string(std::min(n - 1, d)));
    }
    for (double v : data.data) {
        if (!std::isfinite(v)) throw DataError("pca fit: non-finite input");
    }

    EMap x(data.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::RowVectorXd mean = x.colwise().mean();
    EMatrix centered = x.rowwise() - mean;

    PcaModel model;
    model.input_width = d;
    model.k = k;
    model.fitted_on = n;
    model.mean.assign(mean.data(), mean.data() + d);
    model.components = MatrixD(k, d);
    model.explained_variance.resize(k);

    const double denom = static_cast<double>(n - 1);
    if (d <= n) {
        EMatrix cov = (centered.transpose() * centered) / denom;
        Eigen::SelfAdjointEigenSolver<EMatrix> solver(cov);
        if (solver.info() != Eigen::Success) throw DataError("pca eigendecomposition failed");
        // Eigen orders eigenvalues ascending; take the top k from the back.
        for (size_t i = 0; i < k; ++i) {
            auto idx = static_cast<Eigen::Index>(d - 1 - i);
            model.explained_variance[i] = std::max(0.0, solver.eigenvalues()(idx));
            Eigen::VectorXd comp = solver.eigenvectors().col(idx);
            for (size_t j = 0; j < d; ++j) model.components.at(i, j) = comp(static_cast<Eigen::Index>(j));
        }
    } else {
        // Gram route: eigenvectors u of C C^T / (N-1) map to components C^T u.
        EMatrix gram = (centered * centered.transpose()) / denom;
        Eigen::SelfAdjointEigenSolver<EMatrix> solver(gram);
        if (solver.info() != Eigen::Success) throw DataError("pca eigendecomposition failed");
        for (size_t i = 0; i < k; ++i) {
            auto idx = static_cast<Eigen::Index>(n - 1 - i);
            double ev = std::max(0.0, solver.eigenvalues()(idx));
            model.explained_variance[i] = ev;
            Eigen::VectorXd comp = centered.transpose() * solver.eigenvectors().col(idx);
            double norm = comp.norm();
            if (norm > 0) comp /= norm;
            for (size_t j = 0; j < d; ++j) model.components.at(i, j) = comp(static_cast<Eigen::Index>(j));
        }
    }

    // Sign convention: largest-magnitude entry of each component positive.
    for (size_t i = 0; i < k; ++i) {
        auto row = model.components.row(i);
        size_t arg = 0;
        for (size_t j = 1; j < d; ++j) {
            if (std::abs(row[j]) > std::abs(row[arg])) arg = j;
        }
        if (row[arg] < 0) {
            for (double& v : row) v = -v;
        }
    }

    double top = model.explained_variance.front();
    if (top > 0 && model.explained_variance.back() < top * 1e-12) {
        std::cerr << "warning: pca input has rank below k=" << k
                  << "; trailing components carry ~zero variance\n";
    }
    return model;
}

MatrixD PcaModel::transform(const MatrixD& rows) const {
    if (rows.cols != input_width)
        throw DataError("pca transform: row width " + std::to_string(rows.cols) + " != " +
                        std::to_string(input_width));
    EMap x(rows.data.data(), static_cast<Eigen::Index>(rows.rows),
           static_cast<Eigen::Index>(rows.cols));
    EMap comp(components.data.data(), static_cast<Eigen::Index>(k),
              static_cast<Eigen::Index>(input_width));
    Eigen::Map<const Eigen::RowVectorXd> mu(mean.data(), static_cast<Eigen::Index>(input_width));
    EMatrix out = (x.rowwise() - mu) * comp.transpose();
    MatrixD result(rows.rows, k);
    Eigen::Map<EMatrix>(result.data.data(), out.rows(), out.cols()) = out;
    return result;
}

MatrixD PcaModel::inverse_transform(const MatrixD& rows) const {
    if (rows.cols != k)
        throw DataError("pca inverse_transform: row width " + std::to_string(rows.cols) +
                        " != " + std::to_string(k));
    EMap x(rows.data.data(), static_cast<Eigen::Index>(rows.rows),
           static_cast<Eigen::Index>(rows.cols));
    EMap comp(components.data.data(), static_cast<Eigen::Index>(k),
              static_cast<Eigen::Index>(input_width));
    Eigen::Map<const Eigen::RowVectorXd> mu(mean.data(), static_cast<Eigen::Index>(input_width));
    EMatrix out = (x * comp).rowwise() + mu;
    MatrixD result(rows.rows, input_width);
    Eigen::Map<EMatrix>(result.data.data(), out.rows(), out.cols()) = out;
    return result;
}

MatrixF PcaModel::transform(const MatrixF& rows) const {
    return to_float(transform(to_double(rows)));
}

void PcaModel::check() const {
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i; j < k; ++j) {
            double dot = 0.0;
            for (size_t c = 0; c < input_width; ++c) dot += components.at(i, c) * components.at(j, c);
            double expected = i == j ? 1.0 : 0.0;
            if (std::abs(dot - expected) > 1e-8)
                throw DataError("pca model: components not orthonormal");
        }
    }
    for (size_t i = 0; i + 1 < k; ++i) {
        if (explained_variance[i] + 1e-12 < explained_variance[i + 1])
            throw DataError("pca model: explained variance not non-increasing");
    }
}

void PcaModel::save(const std::filesystem::path& path, uint64_t config_hash) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write pca model: " + path.string());
    out.write(kPcaMagic.data(), static_cast<std::streamsize>(kPcaMagic.size()));
    write_u32(out, kPcaVersion);
    write_u64(out, config_hash);
    write_u64(out, input_width);
    write_u64(out, k);
    write_u64(out, fitted_on);
    write_f64_array(out, mean);
    write_f64_array(out, components.data);
    write_f64_array(out, explained_variance);
}

PcaModel PcaModel::load(const std::filesystem::path& path, uint64_t* config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pca model: " + path.string());
    expect_magic(in, kPcaMagic, "pca model");
    uint32_t version = read_u32(in);
    if (version != kPcaVersion)
        throw DataError(path.string() + ": unsupported pca model version");
    uint64_t hash = read_u64(in);
    if (config_hash) *config_hash = hash;
    PcaModel model;
    model.input_width = read_u64(in);
    model.k = read_u64(in);
    model.fitted_on = read_u64(in);
    model.mean.resize(model.input_width);
    read_f64_array(in, model.mean);
    model.components = MatrixD(model.k, model.input_width);
    read_f64_array(in, model.components.data);
    model.explained_variance.resize(model.k);
    read_f64_array(in, model.explained_variance);
    return model;
}

}  // namespace affectrag
