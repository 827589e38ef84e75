#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "voxsynth/encoding.hpp"

namespace voxsynth {

/// Principal-component projection of binary neighborhood vectors.
struct PcaModel {
    Eigen::VectorXd mean;   ///< width
    Eigen::MatrixXd basis;  ///< width x d, orthonormal columns, descending variance
    Eigen::VectorXd variances;

    int width() const { return static_cast<int>(mean.size()); }
    int dims() const { return static_cast<int>(basis.cols()); }
};

/// Fits on the rows of `features` (n x width, entries 0/1). Basis vectors
/// are signed so their largest-magnitude component is positive (the first
/// such component on ties).
PcaModel pca_fit(const Eigen::MatrixXd& features, int d);
PcaModel pca_fit(std::span<const BitKey> keys, int d);

Eigen::VectorXd key_to_vector(const BitKey& key);

/// (bits - mean) * basis
Eigen::VectorXd pca_project(const PcaModel& model, const BitKey& key);
Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& feature);
Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& projection);

}  // namespace voxsynth
