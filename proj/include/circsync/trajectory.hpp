#pragma once

#include "circsync/common.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace circsync {

template <class State>
struct Sample {
    double t;
    State state;
};

/// Time-ordered samples of a simulated state plus free-form run metadata
/// (graph description, algorithm, parameters, seed).
template <class State>
class Trajectory {
public:
    void push(double t, State state) {
        if (!samples_.empty() && !(t > samples_.back().t)) {
            throw ArgumentError("trajectory sample times must be strictly increasing");
        }
        samples_.push_back({t, std::move(state)});
    }

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const Sample<State>& operator[](std::size_t i) const { return samples_[i]; }
    const Sample<State>& front() const { return samples_.front(); }
    const Sample<State>& back() const { return samples_.back(); }
    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    std::map<std::string, std::string>& meta() noexcept { return meta_; }
    const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

private:
    std::vector<Sample<State>> samples_;
    std::map<std::string, std::string> meta_;
};

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double x);

}  // namespace circsync
