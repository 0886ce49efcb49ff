#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace qsd {

/// Fixed-length bit vector used for per-feature membership sets.
class BitColumn {
public:
    BitColumn() = default;
    explicit BitColumn(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

    std::size_t size() const { return size_; }
    std::size_t word_count() const { return words_.size(); }
    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v = true) {
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (v) words_[i >> 6] |= bit;
        else words_[i >> 6] &= ~bit;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    /// Complement within [0, size).
    BitColumn flipped() const {
        BitColumn out(size_);
        for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = ~words_[w];
        out.clear_tail();
        return out;
    }

    void fill_all() {
        for (auto& w : words_) w = ~std::uint64_t{0};
        clear_tail();
    }

    friend bool operator==(const BitColumn&, const BitColumn&) = default;

private:
    void clear_tail() {
        if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

}  // namespace qsd
