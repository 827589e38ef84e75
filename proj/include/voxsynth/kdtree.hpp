#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "voxsynth/encoding.hpp"

namespace voxsynth {

/// Exact Euclidean nearest-neighbor search over float points of fixed
/// dimension (1..32). Ties go to the smallest point index.
class KdTree {
public:
    static constexpr int kMaxDims = 32;

    struct Neighbor {
        std::size_t index = 0;
        double distance_sq = 0.0;
    };

    KdTree() = default;
    /// `points` is row-major n x dims.
    KdTree(std::vector<float> points, int dims);

    std::size_t size() const { return dims_ == 0 ? 0 : points_.size() / static_cast<std::size_t>(dims_); }
    int dims() const { return dims_; }
    std::span<const float> point(std::size_t i) const {
        return {points_.data() + i * static_cast<std::size_t>(dims_), static_cast<std::size_t>(dims_)};
    }
    std::size_t bytes_points() const { return points_.size() * sizeof(float); }

    Neighbor nearest(std::span<const float> query) const;

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t axis = -1;  // -1 marks a leaf
        float split = 0.0f;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, std::span<const float> q, Neighbor& best) const;
    double distance_sq(std::size_t i, std::span<const float> q) const;

    std::vector<float> points_;
    int dims_ = 0;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

struct LinearMatch {
    std::size_t index = 0;
    int distance = 0;
};

/// Brute-force minimum Hamming distance; ties go to the smallest index.
LinearMatch linear_nns(std::span<const BitKey> keys, const BitKey& query);

}  // namespace voxsynth
