#include "voxsynth/hash_index.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <array>
#include <string>
#include <variant>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace {

template <std::size_t W>
using PackedKey = std::array<std::uint64_t, W>;

template <std::size_t W>
PackedKey<W> pack(const BitKey& k) {
    PackedKey<W> p{};
    for (std::size_t i = 0; i < W; ++i) p[i] = k.words()[i];
    return p;
}

template <std::size_t W>
BitKey unpack(int width, const PackedKey<W>& p) {
    return BitKey::from_words(width, p[0], W > 1 ? p[W - 1] : 0);
}

template <std::size_t W>
PackedKey<W> xor_keys(const PackedKey<W>& a, const PackedKey<W>& b) {
    PackedKey<W> r;
    for (std::size_t i = 0; i < W; ++i) r[i] = a[i] ^ b[i];
    return r;
}

template <std::size_t W>
struct Tables {
    using Key = PackedKey<W>;

    absl::flat_hash_map<Key, std::uint32_t> actual;
    std::vector<Key> actual_keys;
    std::vector<std::uint32_t> actual_begin;  // CSR over actual_coords, size K + 1
    std::vector<Coord> actual_coords;

    absl::flat_hash_map<Key, std::uint32_t> neighbor;
    std::vector<Key> neighbor_keys;
    std::vector<std::uint32_t> neighbor_begin;  // CSR over neighbor_sources, size N + 1
    std::vector<std::uint32_t> neighbor_sources;
    std::vector<Coord> neighbor_first;

    void build(const ActiveSet& active, const std::vector<BitKey>& ball_masks) {
        std::vector<std::uint32_t> key_of_voxel(active.size());
        std::vector<std::uint32_t> counts;
        actual.reserve(active.size() / 4 + 16);
        for (std::size_t i = 0; i < active.size(); ++i) {
            const Key k = pack<W>(active.keys[i]);
            auto [it, inserted] = actual.try_emplace(k, static_cast<std::uint32_t>(actual_keys.size()));
            if (inserted) {
                actual_keys.push_back(k);
                counts.push_back(0);
            }
            key_of_voxel[i] = it->second;
            ++counts[it->second];
        }
        actual_begin.assign(actual_keys.size() + 1, 0);
        for (std::size_t a = 0; a < counts.size(); ++a) actual_begin[a + 1] = actual_begin[a] + counts[a];
        actual_coords.resize(active.size());
        std::vector<std::uint32_t> fill(actual_begin.begin(), actual_begin.end() - 1);
        // Active coords arrive in raster order, so each list comes out sorted.
        for (std::size_t i = 0; i < active.size(); ++i) actual_coords[fill[key_of_voxel[i]]++] = active.coords[i];

        if (ball_masks.empty() || actual_keys.empty()) {
            neighbor_begin.assign(1, 0);
            return;
        }
        std::vector<Key> masks;
        masks.reserve(ball_masks.size());
        for (const auto& m : ball_masks) masks.push_back(pack<W>(m));

        const std::size_t pairs = actual_keys.size() * masks.size();
        std::vector<std::uint32_t> pair_neighbor(pairs);
        std::vector<std::uint32_t> ncounts;
        neighbor.reserve(pairs / 2);
        std::size_t p = 0;
        for (std::size_t a = 0; a < actual_keys.size(); ++a) {
            for (const auto& m : masks) {
                const Key k = xor_keys<W>(actual_keys[a], m);
                auto [it, inserted] = neighbor.try_emplace(k, static_cast<std::uint32_t>(neighbor_keys.size()));
                if (inserted) {
                    neighbor_keys.push_back(k);
                    ncounts.push_back(0);
                }
                pair_neighbor[p++] = it->second;
                ++ncounts[it->second];
            }
        }
        neighbor_begin.assign(neighbor_keys.size() + 1, 0);
        for (std::size_t n = 0; n < ncounts.size(); ++n) neighbor_begin[n + 1] = neighbor_begin[n] + ncounts[n];
        neighbor_sources.resize(pairs);
        std::vector<std::uint32_t> nfill(neighbor_begin.begin(), neighbor_begin.end() - 1);
        // Pairs are visited in ascending source order, so source lists come out sorted.
        for (std::size_t q = 0; q < pairs; ++q) {
            neighbor_sources[nfill[pair_neighbor[q]]++] = static_cast<std::uint32_t>(q / masks.size());
        }
        neighbor_first.resize(neighbor_keys.size());
        for (std::size_t n = 0; n < neighbor_keys.size(); ++n) {
            Coord best = actual_coords[actual_begin[neighbor_sources[neighbor_begin[n]]]];
            for (auto s = neighbor_begin[n] + 1; s < neighbor_begin[n + 1]; ++s) {
                const Coord c = actual_coords[actual_begin[neighbor_sources[s]]];
                if (c < best) best = c;
            }
            neighbor_first[n] = best;
        }
    }

    std::span<const Coord> coords_of_actual(std::uint32_t a) const {
        return {actual_coords.data() + actual_begin[a], actual_coords.data() + actual_begin[a + 1]};
    }

    std::vector<Coord> coords_of_neighbor(std::uint32_t n) const {
        std::vector<Coord> out;
        for (auto s = neighbor_begin[n]; s < neighbor_begin[n + 1]; ++s) {
            const auto span = coords_of_actual(neighbor_sources[s]);
            out.insert(out.end(), span.begin(), span.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    FirstMatch find_first(const BitKey& key) const {
        const Key k = pack<W>(key);
        FirstMatch m;
        m.probes = 1;
        if (auto it = actual.find(k); it != actual.end()) {
            m.source = MatchSource::actual;
            m.coord = actual_coords[actual_begin[it->second]];
            return m;
        }
        m.probes = 2;
        if (auto it = neighbor.find(k); it != neighbor.end()) {
            m.source = MatchSource::neighbor;
            m.coord = neighbor_first[it->second];
        }
        return m;
    }

    template <typename Map>
    static std::size_t map_bytes(const Map& m) {
        // slot + one control byte per slot
        return m.capacity() * (sizeof(typename Map::value_type) + 1);
    }

    std::size_t bytes_total() const {
        return map_bytes(actual) + map_bytes(neighbor) + actual_keys.size() * sizeof(Key) +
               neighbor_keys.size() * sizeof(Key) + actual_begin.size() * 4 + actual_coords.size() * sizeof(Coord) +
               neighbor_begin.size() * 4 + neighbor_sources.size() * 4 + neighbor_first.size() * sizeof(Coord);
    }
};

}  // namespace

struct HashIndex::Impl {
    int width = 27;
    int radius = 2;
    NeighborhoodSize nbhd = NeighborhoodSize::three;
    Dims dims;
    std::variant<Tables<1>, Tables<2>> tables;

    template <typename Fn>
    decltype(auto) visit(Fn&& fn) const {
        return std::visit(std::forward<Fn>(fn), tables);
    }
};

const char* to_string(MatchSource s) {
    switch (s) {
        case MatchSource::actual: return "actual";
        case MatchSource::neighbor: return "neighbor";
        case MatchSource::fallback: return "fallback";
    }
    return "?";
}

HashIndex HashIndex::build(const VoxelGrid& template_level, NeighborhoodSize nbhd, int radius) {
    const int width = key_width(nbhd);
    hamming_ball_size(width, radius);  // validates radius and the enumeration cost
    auto impl = std::make_shared<Impl>();
    impl->width = width;
    impl->radius = radius;
    impl->nbhd = nbhd;
    impl->dims = template_level.dims();

    const ActiveSet active = active_voxels(template_level, nbhd);
    const std::vector<BitKey> masks = radius > 0 ? hamming_ball(BitKey(width), radius) : std::vector<BitKey>{};
    if (width <= 64) {
        impl->tables.emplace<Tables<1>>().build(active, masks);
    } else {
        impl->tables.emplace<Tables<2>>().build(active, masks);
    }
    HashIndex index;
    index.impl_ = std::move(impl);
    return index;
}

int HashIndex::width() const { return impl_->width; }
int HashIndex::radius() const { return impl_->radius; }
NeighborhoodSize HashIndex::nbhd() const { return impl_->nbhd; }
const Dims& HashIndex::source_dims() const { return impl_->dims; }

std::size_t HashIndex::actual_key_count() const {
    return impl_->visit([](const auto& t) { return t.actual_keys.size(); });
}

std::size_t HashIndex::neighbor_key_count() const {
    return impl_->visit([](const auto& t) { return t.neighbor_keys.size(); });
}

FirstMatch HashIndex::find_first(const BitKey& key) const {
    if (key.width() != impl_->width) {
        throw ValidationError("lookup: key width " + std::to_string(key.width()) + " does not match index width " +
                              std::to_string(impl_->width));
    }
    return impl_->visit([&](const auto& t) { return t.find_first(key); });
}

MatchResult HashIndex::lookup(const BitKey& key, FallbackPolicy fallback, std::uint64_t seed,
                              std::int64_t voxel_index) const {
    const FirstMatch first = find_first(key);
    MatchResult r;
    r.source = first.source;
    switch (first.source) {
        case MatchSource::actual: {
            const auto span = actual_coords(key);
            r.coords.assign(span.begin(), span.end());
            break;
        }
        case MatchSource::neighbor: r.coords = neighbor_coords(key); break;
        case MatchSource::fallback:
            switch (fallback) {
                case FallbackPolicy::random: r.assigned_value = fallback_coin(seed, voxel_index); break;
                case FallbackPolicy::keep_coarse: r.assigned_value = key.center(); break;
                case FallbackPolicy::majority: r.assigned_value = key.popcount() * 2 > key.width(); break;
            }
            break;
    }
    return r;
}

std::span<const Coord> HashIndex::actual_coords(const BitKey& key) const {
    return impl_->visit([&](const auto& t) -> std::span<const Coord> {
        using T = std::decay_t<decltype(t)>;
        auto it = t.actual.find(pack<sizeof(typename T::Key) / 8>(key));
        if (it == t.actual.end() || key.width() != impl_->width) return {};
        return t.coords_of_actual(it->second);
    });
}

bool HashIndex::has_neighbor(const BitKey& key) const {
    return impl_->visit([&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        return key.width() == impl_->width && t.neighbor.contains(pack<sizeof(typename T::Key) / 8>(key));
    });
}

std::vector<Coord> HashIndex::neighbor_coords(const BitKey& key) const {
    return impl_->visit([&](const auto& t) -> std::vector<Coord> {
        using T = std::decay_t<decltype(t)>;
        auto it = t.neighbor.find(pack<sizeof(typename T::Key) / 8>(key));
        if (it == t.neighbor.end() || key.width() != impl_->width) return {};
        return t.coords_of_neighbor(it->second);
    });
}

std::vector<BitKey> HashIndex::actual_keys() const {
    return impl_->visit([&](const auto& t) {
        std::vector<BitKey> out;
        out.reserve(t.actual_keys.size());
        for (const auto& k : t.actual_keys) out.push_back(unpack(impl_->width, k));
        return out;
    });
}

void HashIndex::for_each_neighbor(const std::function<void(const BitKey&, std::span<const BitKey>)>& fn) const {
    impl_->visit([&](const auto& t) {
        std::vector<BitKey> sources;
        for (std::size_t n = 0; n < t.neighbor_keys.size(); ++n) {
            sources.clear();
            for (auto s = t.neighbor_begin[n]; s < t.neighbor_begin[n + 1]; ++s) {
                sources.push_back(unpack(impl_->width, t.actual_keys[t.neighbor_sources[s]]));
            }
            fn(unpack(impl_->width, t.neighbor_keys[n]), sources);
        }
    });
}

std::size_t HashIndex::bytes_actual_keys() const {
    return actual_key_count() * static_cast<std::size_t>((impl_->width + 63) / 64) * 8;
}

std::size_t HashIndex::bytes_all_keys() const {
    return (actual_key_count() + neighbor_key_count()) * static_cast<std::size_t>((impl_->width + 63) / 64) * 8;
}

std::size_t HashIndex::bytes_total() const {
    return impl_->visit([](const auto& t) { return t.bytes_total(); });
}

}  // namespace voxsynth
