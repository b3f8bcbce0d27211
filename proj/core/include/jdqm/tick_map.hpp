#pragma once

#include "jdqm/lattice.hpp"
#include "jdqm/rng.hpp"

#include <cstddef>
#include <vector>

namespace jdqm::detail {

/// Flat open-addressing map from non-negative lattice ticks to doubles.
/// Linear probing, power-of-two capacity, grow at 60% load. The Brownian
/// cache performs a few inserts and lookups per scheme step, which makes
/// node-based maps the dominant cost of a simulation.
class TickValueMap {
public:
    TickValueMap() { rehash(1 << 12); }

    std::size_t size() const { return size_; }

    const double* find(lattice::Tick key) const {
        std::size_t i = slot(key);
        while (keys_[i] != kEmpty) {
            if (keys_[i] == key) return &vals_[i];
            i = (i + 1) & mask_;
        }
        return nullptr;
    }

    void insert(lattice::Tick key, double value) {
        if ((size_ + 1) * 5 > capacity_ * 3) rehash(capacity_ * 2);
        std::size_t i = slot(key);
        while (keys_[i] != kEmpty) {
            if (keys_[i] == key) return; // first write wins
            i = (i + 1) & mask_;
        }
        keys_[i] = key;
        vals_[i] = value;
        ++size_;
    }

private:
    static constexpr lattice::Tick kEmpty = -1;

    std::size_t slot(lattice::Tick key) const {
        return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(key))) & mask_;
    }

    void rehash(std::size_t new_capacity) {
        std::vector<lattice::Tick> old_keys = std::move(keys_);
        std::vector<double> old_vals = std::move(vals_);
        keys_.assign(new_capacity, kEmpty);
        vals_.assign(new_capacity, 0.0);
        capacity_ = new_capacity;
        mask_ = new_capacity - 1;
        size_ = 0;
        for (std::size_t i = 0; i < old_keys.size(); ++i)
            if (old_keys[i] != kEmpty) insert(old_keys[i], old_vals[i]);
    }

    std::vector<lattice::Tick> keys_;
    std::vector<double> vals_;
    std::size_t capacity_ = 0;
    std::size_t mask_ = 0;
    std::size_t size_ = 0;
};

} // namespace jdqm::detail
