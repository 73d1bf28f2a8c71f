#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <variant>
#include <vector>

#include "ensel/core.hpp"
#include "ensel/diversity.hpp"

namespace ensel {

struct ArchiveEntry {
    RepetitionVector r;
    double loss = 0.0;
    std::optional<BehaviorDescriptor> desc;
    std::uint64_t seq = 0;  // insertion order, used for tie breaking
};

// Solution offered to an archive; the sequence number is stamped on insert.
struct ArchiveOffer {
    RepetitionVector r;
    double loss = 0.0;
    std::optional<BehaviorDescriptor> desc;
};

// Keeps the `capacity` lowest-loss distinct solutions seen so far; loss ties
// favour the earlier insertion.
class QualityArchive {
public:
    explicit QualityArchive(std::size_t capacity);

    void insert(const std::vector<ArchiveOffer>& offered);

    // Sorted by (loss, insertion order).
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    const ArchiveEntry& best() const;
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::vector<ArchiveEntry> entries_;
    std::unordered_set<RepetitionVector, RepetitionVectorHash> members_;
    std::uint64_t next_seq_ = 0;
};

// g x g grid over (alc, css) behaviour space with one elite per cell. Every
// offered solution stays in a buffer; after each insertion the cell
// boundaries are refitted to the quantiles of the buffered descriptor values
// and the whole buffer is reassigned, so the grid tracks the occupied region
// of behaviour space.
class SlidingGridArchive {
public:
    // capacity must be a perfect square; the grid is sqrt(capacity) per side.
    explicit SlidingGridArchive(std::size_t capacity);

    void insert(const std::vector<ArchiveOffer>& offered);

    // Refit boundaries to buffer quantiles and reassign every buffered
    // solution. Idempotent while the buffer is unchanged.
    void remap();

    // Cell winners in row-major cell order.
    std::vector<ArchiveEntry> entries() const;
    const ArchiveEntry& best() const;
    std::size_t size() const;

    int grid_side() const { return g_; }
    int remap_count() const { return remap_count_; }
    const std::vector<double>& boundaries(int dim) const { return boundaries_.at(dim); }
    const std::vector<ArchiveEntry>& buffer() const { return buffer_; }
    std::pair<int, int> cell_of(const BehaviorDescriptor& d) const;

private:
    void assign(std::size_t buffer_index);

    int g_;
    std::array<std::vector<double>, 2> boundaries_;  // dim 0: alc, dim 1: css
    std::vector<ArchiveEntry> buffer_;
    std::vector<std::optional<std::size_t>> cells_;  // winner index into buffer_
    std::unordered_set<RepetitionVector, RepetitionVectorHash> members_;
    std::uint64_t next_seq_ = 0;
    int remap_count_ = 0;
};

// Uniform interface over the two archive kinds.
class Archive {
public:
    explicit Archive(QualityArchive a) : impl_(std::move(a)) {}
    explicit Archive(SlidingGridArchive a) : impl_(std::move(a)) {}

    void insert(const std::vector<ArchiveOffer>& offered) {
        std::visit([&](auto& a) { a.insert(offered); }, impl_);
    }
    std::vector<ArchiveEntry> entries() const {
        return std::visit([](const auto& a) -> std::vector<ArchiveEntry> {
            if constexpr (std::is_same_v<std::decay_t<decltype(a)>, QualityArchive>) {
                return a.entries();
            } else {
                return a.entries();
            }
        }, impl_);
    }
    const ArchiveEntry& best() const {
        return std::visit([](const auto& a) -> const ArchiveEntry& { return a.best(); }, impl_);
    }
    std::size_t size() const {
        return std::visit([](const auto& a) { return a.size(); }, impl_);
    }
    const SlidingGridArchive* grid() const { return std::get_if<SlidingGridArchive>(&impl_); }

private:
    std::variant<QualityArchive, SlidingGridArchive> impl_;
};

// Linear-interpolation quantile of a sample (the convention used for the
// boundary refit). level is in [0, 1]; level 0 and 1 give the min and max.
double quantile(std::vector<double> values, double level);

}  // namespace ensel
