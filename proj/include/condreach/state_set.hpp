#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace condreach {

// Dense bit-set over state indices 0..universe-1.
class StateSet {
  public:
    StateSet() = default;
    explicit StateSet(std::size_t universe) : bits_(universe, false) {}
    StateSet(std::size_t universe, std::initializer_list<std::size_t> members) : bits_(universe, false) {
        for (std::size_t s : members) insert(s);
    }

    std::size_t universe() const { return bits_.size(); }

    bool contains(std::size_t s) const { return s < bits_.size() && bits_[s]; }

    void insert(std::size_t s) {
        if (!bits_[s]) {
            bits_[s] = true;
            ++count_;
        }
    }

    void erase(std::size_t s) {
        if (s < bits_.size() && bits_[s]) {
            bits_[s] = false;
            --count_;
        }
    }

    std::size_t count() const { return count_; }
    bool empty() const { return count_ == 0; }

    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        out.reserve(count_);
        for (std::size_t s = 0; s < bits_.size(); ++s) {
            if (bits_[s]) out.push_back(s);
        }
        return out;
    }

    StateSet complement() const {
        StateSet out(bits_.size());
        for (std::size_t s = 0; s < bits_.size(); ++s) {
            if (!bits_[s]) out.insert(s);
        }
        return out;
    }

    bool intersects(const StateSet& other) const {
        std::size_t n = std::min(bits_.size(), other.bits_.size());
        for (std::size_t s = 0; s < n; ++s) {
            if (bits_[s] && other.bits_[s]) return true;
        }
        return false;
    }

    bool operator==(const StateSet& other) const = default;

  private:
    std::vector<bool> bits_;
    std::size_t count_ = 0;
};

}  // namespace condreach
