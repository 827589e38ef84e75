#include "voxsynth/pca.hpp"

#include <string>

#include "voxsynth/error.hpp"

namespace voxsynth {

Eigen::VectorXd key_to_vector(const BitKey& key) {
    Eigen::VectorXd v(key.width());
    for (int i = 0; i < key.width(); ++i) v[i] = key.test(i) ? 1.0 : 0.0;
    return v;
}

PcaModel pca_fit(const Eigen::MatrixXd& features, int d) {
    const auto n = features.rows();
    const auto width = features.cols();
    if (d < 1 || d > width) {
        throw ValidationError("pca_fit: target dims must be in [1, " + std::to_string(width) + "], got " +
                              std::to_string(d));
    }
    if (n < d) {
        throw ValidationError("pca_fit: need at least d = " + std::to_string(d) + " samples, got " +
                              std::to_string(n));
    }
    PcaModel model;
    model.mean = features.colwise().mean().transpose();
    const Eigen::MatrixXd centered = features.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
    if (cov.trace() <= 0.0) throw ValidationError("pca_fit: features have zero variance (all rows identical)");

    // Ascending eigenvalues; deterministic tridiagonal QR on a small symmetric matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ValidationError("pca_fit: eigen decomposition failed");
    model.basis.resize(width, d);
    model.variances.resize(d);
    for (int k = 0; k < d; ++k) {
        const Eigen::Index col = width - 1 - k;
        Eigen::VectorXd v = solver.eigenvectors().col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        model.basis.col(k) = v;
        model.variances[k] = std::max(0.0, solver.eigenvalues()[col]);
    }
    return model;
}

PcaModel pca_fit(std::span<const BitKey> keys, int d) {
    if (keys.empty()) throw ValidationError("pca_fit: no features");
    Eigen::MatrixXd features(static_cast<Eigen::Index>(keys.size()), keys.front().width());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].width() != keys.front().width()) throw ValidationError("pca_fit: mixed key widths");
        features.row(static_cast<Eigen::Index>(i)) = key_to_vector(keys[i]).transpose();
    }
    return pca_fit(features, d);
}

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& feature) {
    if (feature.size() != model.mean.size()) {
        throw ValidationError("pca_project: feature width " + std::to_string(feature.size()) +
                              " does not match model width " + std::to_string(model.mean.size()));
    }
    return model.basis.transpose() * (feature - model.mean);
}

Eigen::VectorXd pca_project(const PcaModel& model, const BitKey& key) {
    if (key.width() != model.width()) {
        throw ValidationError("pca_project: key width " + std::to_string(key.width()) +
                              " does not match model width " + std::to_string(model.width()));
    }
    return pca_project(model, key_to_vector(key));
}

Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& projection) {
    return model.mean + model.basis * projection;
}

}  // namespace voxsynth
