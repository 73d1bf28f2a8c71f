#include "ensel/archive.hpp"

#include <algorithm>
#include <cmath>

namespace ensel {

double quantile(std::vector<double> values, double level) {
    if (values.empty()) throw Error("quantile: empty sample");
    if (level < 0.0 || level > 1.0) throw Error("quantile: level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = level * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

QualityArchive::QualityArchive(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error("archive capacity must be positive");
}

void QualityArchive::insert(const std::vector<ArchiveOffer>& offered) {
    for (const ArchiveOffer& o : offered) {
        if (!members_.insert(o.r).second) continue;  // duplicate, ignore
        entries_.push_back({o.r, o.loss, o.desc, next_seq_++});
    }
    std::stable_sort(entries_.begin(), entries_.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        if (a.loss != b.loss) return a.loss < b.loss;
        return a.seq < b.seq;
    });
    if (entries_.size() > capacity_) {
        for (std::size_t i = capacity_; i < entries_.size(); ++i) members_.erase(entries_[i].r);
        entries_.resize(capacity_);
    }
}

const ArchiveEntry& QualityArchive::best() const {
    if (entries_.empty()) throw Error("archive is empty");
    return entries_.front();
}

SlidingGridArchive::SlidingGridArchive(std::size_t capacity) {
    if (capacity == 0) throw Error("archive capacity must be positive");
    g_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(capacity))));
    if (static_cast<std::size_t>(g_) * static_cast<std::size_t>(g_) != capacity) {
        throw Error("sliding grid archive capacity must be a perfect square");
    }
    cells_.assign(static_cast<std::size_t>(g_) * g_, std::nullopt);
    // Until the first refit, span the theoretical descriptor ranges.
    for (int dim = 0; dim < 2; ++dim) {
        const double lo = dim == 0 ? -1.0 : 0.0;
        const double hi = 1.0;
        boundaries_[dim].resize(g_ + 1);
        for (int k = 0; k <= g_; ++k) {
            boundaries_[dim][k] = lo + (hi - lo) * static_cast<double>(k) / g_;
        }
    }
}

std::pair<int, int> SlidingGridArchive::cell_of(const BehaviorDescriptor& d) const {
    auto axis = [&](int dim, double v) {
        // Number of interior boundaries at or below v; lands in [0, g-1].
        int idx = 0;
        for (int k = 1; k < g_; ++k) {
            if (boundaries_[dim][k] <= v) ++idx;
        }
        return idx;
    };
    return {axis(0, d.alc), axis(1, d.css)};
}

void SlidingGridArchive::assign(std::size_t buffer_index) {
    const ArchiveEntry& e = buffer_[buffer_index];
    const auto [ca, cc] = cell_of(*e.desc);
    std::optional<std::size_t>& slot = cells_[static_cast<std::size_t>(ca) * g_ + cc];
    if (!slot.has_value()) {
        slot = buffer_index;
        return;
    }
    const ArchiveEntry& incumbent = buffer_[*slot];
    if (e.loss < incumbent.loss || (e.loss == incumbent.loss && e.seq < incumbent.seq)) {
        slot = buffer_index;
    }
}

void SlidingGridArchive::insert(const std::vector<ArchiveOffer>& offered) {
    for (const ArchiveOffer& o : offered) {
        if (!o.desc.has_value()) throw Error("sliding grid archive requires behaviour descriptors");
        if (!members_.insert(o.r).second) continue;
        buffer_.push_back({o.r, o.loss, o.desc, next_seq_++});
        assign(buffer_.size() - 1);
    }
    remap();
}

void SlidingGridArchive::remap() {
    if (buffer_.empty()) return;
    for (int dim = 0; dim < 2; ++dim) {
        std::vector<double> values;
        values.reserve(buffer_.size());
        for (const ArchiveEntry& e : buffer_) {
            values.push_back(dim == 0 ? e.desc->alc : e.desc->css);
        }
        for (int k = 0; k <= g_; ++k) {
            boundaries_[dim][k] = quantile(values, static_cast<double>(k) / g_);
        }
    }
    std::fill(cells_.begin(), cells_.end(), std::nullopt);
    for (std::size_t i = 0; i < buffer_.size(); ++i) assign(i);
    ++remap_count_;
}

std::vector<ArchiveEntry> SlidingGridArchive::entries() const {
    std::vector<ArchiveEntry> out;
    for (const auto& slot : cells_) {
        if (slot.has_value()) out.push_back(buffer_[*slot]);
    }
    return out;
}

const ArchiveEntry& SlidingGridArchive::best() const {
    const ArchiveEntry* best = nullptr;
    for (const auto& slot : cells_) {
        if (!slot.has_value()) continue;
        const ArchiveEntry& e = buffer_[*slot];
        if (best == nullptr || e.loss < best->loss ||
            (e.loss == best->loss && e.seq < best->seq)) {
            best = &e;
        }
    }
    if (best == nullptr) throw Error("archive is empty");
    return *best;
}

std::size_t SlidingGridArchive::size() const {
    std::size_t n = 0;
    for (const auto& slot : cells_) n += slot.has_value() ? 1 : 0;
    return n;
}

}  // namespace ensel
