#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace seqrej {

// Subset of {0, ..., n-1}, used for rejection sets, truth assignments and
// node sets over one fixed universe.  Sets from different universes never mix.
class IndexSet {
public:
    IndexSet() = default;

    explicit IndexSet(std::size_t universe_size)
        : n_(universe_size), w_((universe_size + 63) / 64, 0) {}

    static IndexSet from_mask(std::size_t universe_size, std::uint64_t mask) {
        if (universe_size > 64)
            throw std::invalid_argument("IndexSet::from_mask: universe larger than 64");
        IndexSet s(universe_size);
        if (universe_size < 64 && (mask >> universe_size) != 0)
            throw std::invalid_argument("IndexSet::from_mask: mask has bits outside universe");
        if (!s.w_.empty()) s.w_[0] = mask;
        return s;
    }

    static IndexSet of(std::size_t universe_size, std::initializer_list<std::size_t> members) {
        IndexSet s(universe_size);
        for (std::size_t i : members) s.set(i);
        return s;
    }

    static IndexSet full(std::size_t universe_size) {
        IndexSet s(universe_size);
        for (std::size_t i = 0; i < s.w_.size(); ++i) s.w_[i] = ~std::uint64_t{0};
        s.trim();
        return s;
    }

    std::size_t universe_size() const { return n_; }

    bool test(std::size_t i) const {
        check_index(i);
        return (w_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::size_t i) {
        check_index(i);
        w_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }

    void reset(std::size_t i) {
        check_index(i);
        w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint64_t w : w_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    bool empty() const {
        for (std::uint64_t w : w_)
            if (w) return false;
        return true;
    }

    bool is_subset_of(const IndexSet& o) const {
        check_same(o);
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }

    bool is_strict_subset_of(const IndexSet& o) const {
        return is_subset_of(o) && !(*this == o);
    }

    bool intersects(const IndexSet& o) const {
        check_same(o);
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & o.w_[i]) return true;
        return false;
    }

    IndexSet operator|(const IndexSet& o) const {
        check_same(o);
        IndexSet r(*this);
        for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] |= o.w_[i];
        return r;
    }

    IndexSet operator&(const IndexSet& o) const {
        check_same(o);
        IndexSet r(*this);
        for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] &= o.w_[i];
        return r;
    }

    // set difference
    IndexSet operator-(const IndexSet& o) const {
        check_same(o);
        IndexSet r(*this);
        for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] &= ~o.w_[i];
        return r;
    }

    IndexSet complement() const {
        IndexSet r(*this);
        for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] = ~r.w_[i];
        r.trim();
        return r;
    }

    IndexSet& operator|=(const IndexSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
        return *this;
    }

    bool operator==(const IndexSet& o) const { return n_ == o.n_ && w_ == o.w_; }
    bool operator!=(const IndexSet& o) const { return !(*this == o); }

    // lexicographic on words; any strict total order works for map keys
    bool operator<(const IndexSet& o) const {
        if (n_ != o.n_) return n_ < o.n_;
        return w_ < o.w_;
    }

    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        out.reserve(count());
        for_each_member([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    template <class F>
    void for_each_member(F&& f) const {
        for (std::size_t wi = 0; wi < w_.size(); ++wi) {
            std::uint64_t w = w_[wi];
            while (w) {
                std::size_t b = static_cast<std::size_t>(__builtin_ctzll(w));
                f(wi * 64 + b);
                w &= w - 1;
            }
        }
    }

    std::uint64_t to_mask() const {
        if (n_ > 64)
            throw std::invalid_argument("IndexSet::to_mask: universe larger than 64");
        return w_.empty() ? 0 : w_[0];
    }

    std::size_t hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull ^ n_;
        for (std::uint64_t w : w_) {
            h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }

private:
    void check_index(std::size_t i) const {
        if (i >= n_) throw std::out_of_range("IndexSet: index outside universe");
    }
    void check_same(const IndexSet& o) const {
        if (n_ != o.n_) throw std::invalid_argument("IndexSet: universe size mismatch");
    }
    void trim() {
        if (n_ % 64 != 0 && !w_.empty())
            w_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

struct IndexSetHash {
    std::size_t operator()(const IndexSet& s) const { return s.hash(); }
};

}  // namespace seqrej
