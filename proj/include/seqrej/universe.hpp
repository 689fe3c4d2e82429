#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace seqrej {

// Labelled hypothesis universe.  Indices are stable; labels must be unique.
class Universe {
public:
    Universe() = default;

    explicit Universe(std::vector<std::string> labels) : labels_(std::move(labels)) {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i].empty())
                throw std::invalid_argument("Universe: empty label");
            auto [it, fresh] = index_.emplace(labels_[i], i);
            (void)it;
            if (!fresh)
                throw std::invalid_argument("Universe: duplicate label '" + labels_[i] + "'");
        }
    }

    static Universe numbered(std::size_t n, const std::string& prefix = "H") {
        std::vector<std::string> labels;
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i + 1));
        return Universe(std::move(labels));
    }

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::size_t index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            throw std::invalid_argument("Universe: unknown label '" + label + "'");
        return it->second;
    }

    bool has(const std::string& label) const { return index_.count(label) > 0; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace seqrej
