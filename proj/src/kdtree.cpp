#include "voxsynth/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(std::vector<float> points, int dims) : points_(std::move(points)), dims_(dims) {
    if (dims < 1 || dims > kMaxDims) {
        throw ValidationError("kd-tree dims must be in [1, 32], got " + std::to_string(dims));
    }
    if (points_.size() % static_cast<std::size_t>(dims) != 0) {
        throw ValidationError("kd-tree point buffer is not a multiple of dims");
    }
    const std::size_t n = size();
    if (n == 0) throw ValidationError("kd-tree needs at least one point");
    if (n > 0xFFFFFFF0u) throw ValidationError("kd-tree supports fewer than 2^32 points");
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(2 * n / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(n));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    // Split on the axis of largest spread.
    int axis = 0;
    float best_spread = -1.0f;
    for (int a = 0; a < dims_; ++a) {
        float lo = points_[order_[begin] * dims_ + a];
        float hi = lo;
        for (auto i = begin + 1; i < end; ++i) {
            const float v = points_[order_[i] * dims_ + a];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = a;
        }
    }
    if (best_spread <= 0.0f) return id;  // all points coincide

    const std::uint32_t mid = begin + (end - begin) / 2;
    auto less = [&](std::uint32_t a, std::uint32_t b) {
        const float va = points_[a * dims_ + axis];
        const float vb = points_[b * dims_ + axis];
        return va < vb || (va == vb && a < b);
    };
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, less);
    const float split = points_[order_[mid] * dims_ + axis];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
}

double KdTree::distance_sq(std::size_t i, std::span<const float> q) const {
    const float* p = points_.data() + i * static_cast<std::size_t>(dims_);
    double s = 0.0;
    for (int k = 0; k < dims_; ++k) {
        const double t = static_cast<double>(p[k]) - static_cast<double>(q[k]);
        s += t * t;
    }
    return s;
}

void KdTree::search(std::int32_t id, std::span<const float> q, Neighbor& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
        for (auto i = node.begin; i < node.end; ++i) {
            const std::size_t p = order_[i];
            const double d = distance_sq(p, q);
            if (d < best.distance_sq || (d == best.distance_sq && p < best.index)) best = Neighbor{p, d};
        }
        return;
    }
    const double diff = static_cast<double>(q[node.axis]) - static_cast<double>(node.split);
    const bool go_left = diff < 0.0;
    search(go_left ? node.left : node.right, q, best);
    // Equal bounds are still explored so index tie-breaks stay exact.
    if (diff * diff <= best.distance_sq) search(go_left ? node.right : node.left, q, best);
}

KdTree::Neighbor KdTree::nearest(std::span<const float> query) const {
    if (nodes_.empty()) throw ValidationError("kd-tree is empty");
    if (static_cast<int>(query.size()) != dims_) {
        throw ValidationError("kd-tree query has " + std::to_string(query.size()) + " dims, tree has " +
                              std::to_string(dims_));
    }
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    best.index = std::numeric_limits<std::size_t>::max();
    search(0, query, best);
    return best;
}

LinearMatch linear_nns(std::span<const BitKey> keys, const BitKey& query) {
    if (keys.empty()) throw ValidationError("linear_nns: empty key list");
    LinearMatch best{0, hamming(keys[0], query)};
    for (std::size_t i = 1; i < keys.size() && best.distance > 0; ++i) {
        const int d = hamming(keys[i], query);
        if (d < best.distance) best = LinearMatch{i, d};
    }
    return best;
}

}  // namespace voxsynth
