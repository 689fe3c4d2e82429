#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "index_set.hpp"
#include "rng.hpp"
#include "schedule.hpp"

namespace seqrej {

// Rectangular numeric data: rows are observation units, columns variables.
struct DataMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;              // row-major
    std::vector<std::string> column_names;   // empty or size cols
    std::vector<std::string> row_groups;     // empty or size rows

    static DataMatrix zeros(std::size_t rows, std::size_t cols) {
        DataMatrix m;
        m.rows = rows;
        m.cols = cols;
        m.values.assign(rows * cols, 0.0);
        return m;
    }

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }

    void validate() const {
        if (values.size() != rows * cols)
            throw std::invalid_argument("DataMatrix: value count does not match shape");
        if (!column_names.empty() && column_names.size() != cols)
            throw std::invalid_argument("DataMatrix: column name count mismatch");
        if (!row_groups.empty() && row_groups.size() != rows)
            throw std::invalid_argument("DataMatrix: group labels must cover all rows");
    }
};

// Bijection of the data space: output row i takes sign[i] times input row
// perm[i].  Covers permutations, sign flips, and their compositions.
struct Transform {
    std::vector<std::size_t> perm;
    std::vector<std::int8_t> sign;

    static Transform identity(std::size_t n) {
        Transform t;
        t.perm.resize(n);
        std::iota(t.perm.begin(), t.perm.end(), std::size_t{0});
        t.sign.assign(n, 1);
        return t;
    }

    std::size_t rows() const { return perm.size(); }

    void validate() const {
        std::size_t n = perm.size();
        if (sign.size() != n) throw std::invalid_argument("Transform: shape mismatch");
        std::vector<char> seen(n, 0);
        for (std::size_t p : perm) {
            if (p >= n || seen[p])
                throw std::invalid_argument("Transform: row map is not a permutation");
            seen[p] = 1;
        }
        for (std::int8_t s : sign)
            if (s != 1 && s != -1)
                throw std::invalid_argument("Transform: signs must be +1 or -1");
    }

    void apply_into(const DataMatrix& in, DataMatrix& out) const {
        if (in.rows != rows()) throw std::invalid_argument("Transform: row count mismatch");
        out.rows = in.rows;
        out.cols = in.cols;
        out.values.resize(in.values.size());
        out.column_names = in.column_names;
        out.row_groups = in.row_groups;
        for (std::size_t i = 0; i < in.rows; ++i) {
            double s = static_cast<double>(sign[i]);
            const double* src = in.values.data() + perm[i] * in.cols;
            double* dst = out.values.data() + i * in.cols;
            for (std::size_t j = 0; j < in.cols; ++j) dst[j] = s * src[j];
        }
    }

    DataMatrix apply(const DataMatrix& in) const {
        DataMatrix out;
        apply_into(in, out);
        return out;
    }

    // apply `inner` first, then this transform
    Transform after(const Transform& inner) const {
        std::size_t n = rows();
        if (inner.rows() != n) throw std::invalid_argument("Transform: row count mismatch");
        Transform c;
        c.perm.resize(n);
        c.sign.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            c.perm[i] = inner.perm[perm[i]];
            c.sign[i] = static_cast<std::int8_t>(sign[i] * inner.sign[perm[i]]);
        }
        return c;
    }

    Transform inverse() const {
        std::size_t n = rows();
        Transform inv;
        inv.perm.resize(n);
        inv.sign.resize(n);
        for (std::size_t i = 0; i < n; ++i) inv.perm[perm[i]] = i;
        for (std::size_t i = 0; i < n; ++i) inv.sign[i] = sign[inv.perm[i]];
        return inv;
    }

    bool operator==(const Transform& o) const { return perm == o.perm && sign == o.sign; }
};

struct TransformHash {
    std::size_t operator()(const Transform& t) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::size_t p : t.perm) h = h * 1099511628211ull + p;
        for (std::int8_t s : t.sign) h = h * 1099511628211ull + static_cast<std::uint64_t>(s + 2);
        return static_cast<std::size_t>(h);
    }
};

// A finite family of data transformations, either a complete group or a
// recorded random sample from one.
struct TransformGroup {
    std::string kind;   // "sign-flip" | "permutation" | "user-list"
    std::size_t n_rows = 0;
    std::vector<Transform> elements;
    bool sampled = false;
    std::uint64_t seed = 0;
    std::size_t sample_size = 0;
    bool include_identity = true;

    std::size_t size() const { return elements.size(); }
};

// All 2^n per-row sign flips (the one-sample symmetry group).
inline TransformGroup sign_flip_group(std::size_t n_rows) {
    if (n_rows > 20)
        throw std::invalid_argument("sign_flip_group: full enumeration beyond 20 rows");
    TransformGroup g;
    g.kind = "sign-flip";
    g.n_rows = n_rows;
    g.elements.reserve(std::size_t{1} << n_rows);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n_rows); ++m) {
        Transform t = Transform::identity(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i)
            if ((m >> i) & 1) t.sign[i] = -1;
        g.elements.push_back(std::move(t));
    }
    return g;
}

inline TransformGroup sign_flip_group_sampled(std::size_t n_rows, std::size_t sample_size,
                                              std::uint64_t seed, bool include_identity = true) {
    if (sample_size < 1) throw std::invalid_argument("sampled group: sample size must be >= 1");
    TransformGroup g;
    g.kind = "sign-flip";
    g.n_rows = n_rows;
    g.sampled = true;
    g.seed = seed;
    g.sample_size = sample_size;
    g.include_identity = include_identity;
    Rng rng(seed);
    g.elements.reserve(sample_size);
    if (include_identity) g.elements.push_back(Transform::identity(n_rows));
    while (g.elements.size() < sample_size) {
        Transform t = Transform::identity(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i)
            if (rng.next_u64() & 1) t.sign[i] = -1;
        g.elements.push_back(std::move(t));
    }
    return g;
}

// Every rearrangement of the rows (the two-sample exchangeability group when
// the statistic compares fixed row positions); order is (row count)!.
inline TransformGroup permutation_group(std::size_t n_rows) {
    double order = 1.0;
    for (std::size_t i = 2; i <= n_rows; ++i) order *= static_cast<double>(i);
    if (order > 1e5)
        throw std::invalid_argument(
            "permutation_group: full enumeration too large; use the sampled variant");
    TransformGroup g;
    g.kind = "permutation";
    g.n_rows = n_rows;
    std::vector<std::size_t> p(n_rows);
    std::iota(p.begin(), p.end(), std::size_t{0});
    do {
        Transform t;
        t.perm = p;
        t.sign.assign(n_rows, 1);
        g.elements.push_back(std::move(t));
    } while (std::next_permutation(p.begin(), p.end()));
    return g;
}

inline TransformGroup permutation_group_sampled(std::size_t n_rows, std::size_t sample_size,
                                                std::uint64_t seed, bool include_identity = true) {
    if (sample_size < 1) throw std::invalid_argument("sampled group: sample size must be >= 1");
    TransformGroup g;
    g.kind = "permutation";
    g.n_rows = n_rows;
    g.sampled = true;
    g.seed = seed;
    g.sample_size = sample_size;
    g.include_identity = include_identity;
    Rng rng(seed);
    if (include_identity) g.elements.push_back(Transform::identity(n_rows));
    while (g.elements.size() < sample_size) {
        Transform t = Transform::identity(n_rows);
        rng.shuffle(t.perm);
        g.elements.push_back(std::move(t));
    }
    return g;
}

inline TransformGroup user_transform_group(std::size_t n_rows, std::vector<Transform> elements) {
    TransformGroup g;
    g.kind = "user-list";
    g.n_rows = n_rows;
    for (const Transform& t : elements) {
        if (t.rows() != n_rows)
            throw std::invalid_argument("user_transform_group: transform row count mismatch");
        t.validate();
    }
    g.elements = std::move(elements);
    return g;
}

struct GroupVerdict {
    bool ok = true;
    std::vector<std::string> failures;
};

// Checks that an enumerated family really is a group: identity present,
// closed under composition, closed under inverses, no duplicates.  Built-in
// full enumerations are vouched for by construction shape; user lists get the
// quadratic composition check.
inline GroupVerdict verify_group(const TransformGroup& g) {
    if (g.sampled)
        throw std::invalid_argument(
            "verify_group: a sampled collection is not expected to be closed; verify the full "
            "group instead");
    if (g.size() > 10000)
        throw std::invalid_argument("verify_group: enumeration larger than 10^4 elements");
    GroupVerdict v;
    if (g.elements.empty()) {
        v.ok = false;
        v.failures.push_back("empty family");
        return v;
    }
    std::unordered_set<Transform, TransformHash> members(g.elements.begin(), g.elements.end());
    if (members.size() != g.elements.size()) {
        v.ok = false;
        v.failures.push_back("duplicate elements");
    }
    if (!members.count(Transform::identity(g.n_rows))) {
        v.ok = false;
        v.failures.push_back("identity missing");
    }
    for (const Transform& t : g.elements) {
        if (!members.count(t.inverse())) {
            v.ok = false;
            v.failures.push_back("inverse missing for some element");
            break;
        }
    }
    if (g.kind == "sign-flip" && g.size() == (std::size_t{1} << g.n_rows)) {
        // complete product group: closure holds structurally
        return v;
    }
    if (g.kind == "permutation") {
        double order = 1.0;
        for (std::size_t i = 2; i <= g.n_rows; ++i) order *= static_cast<double>(i);
        if (static_cast<double>(g.size()) == order) return v;  // complete symmetric group
    }
    if (g.size() > 3000)
        throw std::invalid_argument(
            "verify_group: user list too large for exhaustive composition check");
    for (const Transform& a : g.elements) {
        for (const Transform& b : g.elements) {
            if (!members.count(a.after(b))) {
                v.ok = false;
                v.failures.push_back("not closed under composition");
                return v;
            }
        }
    }
    return v;
}

// Per-hypothesis test statistics; larger means more evidence against the
// hypothesis.
struct StatisticFamily {
    std::string id;
    std::size_t count = 0;
    std::function<double(const DataMatrix&, std::size_t h)> eval;
};

// hypothesis h: the mean of column h is zero (against > 0)
inline StatisticFamily column_means(std::size_t cols) {
    StatisticFamily f;
    f.id = "column-mean";
    f.count = cols;
    f.eval = [](const DataMatrix& m, std::size_t h) {
        double sum = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) sum += m.at(r, h);
        return m.rows ? sum / static_cast<double>(m.rows) : 0.0;
    };
    return f;
}

// one-sample t statistic per column; a zero-variance column degenerates to a
// huge value of the mean's sign
inline StatisticFamily column_t_statistics(std::size_t cols) {
    StatisticFamily f;
    f.id = "column-t";
    f.count = cols;
    f.eval = [](const DataMatrix& m, std::size_t h) {
        std::size_t n = m.rows;
        if (n < 2) return 0.0;
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += m.at(r, h);
        double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double d = m.at(r, h) - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd == 0.0) {
            if (mean > 0.0) return std::numeric_limits<double>::max();
            if (mean < 0.0) return -std::numeric_limits<double>::max();
            return 0.0;
        }
        return mean / (sd / std::sqrt(static_cast<double>(n)));
    };
    return f;
}

// mean difference between two fixed sets of row positions (taken from the
// original group labels, so permuting rows permutes group membership)
inline StatisticFamily two_sample_mean_difference(const std::vector<std::string>& row_groups,
                                                  const std::string& positive_group,
                                                  std::size_t cols) {
    std::vector<std::size_t> a, b;
    for (std::size_t r = 0; r < row_groups.size(); ++r)
        (row_groups[r] == positive_group ? a : b).push_back(r);
    if (a.empty() || b.empty())
        throw std::invalid_argument("two_sample_mean_difference: both groups must be nonempty");
    StatisticFamily f;
    f.id = "two-sample-mean-diff";
    f.count = cols;
    f.eval = [a, b](const DataMatrix& m, std::size_t h) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t r : a) sa += m.at(r, h);
        for (std::size_t r : b) sb += m.at(r, h);
        return sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
    };
    return f;
}

// s = r - floor(level * r): the rank (1-based, ascending) whose order
// statistic becomes the critical value.
inline std::size_t quantile_index(std::size_t r, double level) {
    if (r < 1) throw std::invalid_argument("quantile_index: group must be nonempty");
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("quantile_index: level must lie strictly inside (0,1)");
    double scaled = level * static_cast<double>(r);
    auto f = static_cast<std::size_t>(std::floor(scaled + 1e-9));
    if (f >= r) f = r - 1;
    return r - f;
}

// Observed statistics plus the transform-by-hypothesis statistic table,
// computed once and then shared by every step of a run.
class ResamplingEvidence {
public:
    ResamplingEvidence(const StatisticFamily& stats, const DataMatrix& data,
                       const TransformGroup& group)
        : r_(group.size()), n_(stats.count) {
        data.validate();
        if (group.elements.empty())
            throw std::invalid_argument("ResamplingEvidence: empty transform family");
        if (group.n_rows != data.rows)
            throw std::invalid_argument("ResamplingEvidence: group row count mismatch");
        observed_.resize(n_);
        for (std::size_t h = 0; h < n_; ++h) observed_[h] = stats.eval(data, h);
        table_.resize(r_ * n_);
        DataMatrix scratch;
        for (std::size_t i = 0; i < r_; ++i) {
            group.elements[i].apply_into(data, scratch);
            for (std::size_t h = 0; h < n_; ++h) table_[i * n_ + h] = stats.eval(scratch, h);
        }
        meta_["group"] = group.kind;
        meta_["group size"] = std::to_string(r_);
        if (group.sampled) {
            meta_["sampled"] = "true";
            meta_["seed"] = std::to_string(group.seed);
            meta_["sample size"] = std::to_string(group.sample_size);
            meta_["identity included"] = group.include_identity ? "true" : "false";
        }
    }

    std::size_t group_size() const { return r_; }
    std::size_t hypothesis_count() const { return n_; }
    const std::vector<double>& observed() const { return observed_; }
    double transformed_stat(std::size_t i, std::size_t h) const { return table_[i * n_ + h]; }
    const std::map<std::string, std::string>& metadata() const { return meta_; }

    // row maxima over the remaining hypotheses, one value per transform
    std::vector<double> remaining_maxima(const IndexSet& rejected) const {
        if (rejected.universe_size() != n_)
            throw std::invalid_argument("ResamplingEvidence: rejection set universe mismatch");
        if (rejected.count() == n_)
            throw std::invalid_argument("ResamplingEvidence: no hypotheses remain");
        std::vector<double> maxima(r_, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < r_; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            const double* row = table_.data() + i * n_;
            for (std::size_t h = 0; h < n_; ++h)
                if (!rejected.test(h)) best = std::max(best, row[h]);
            maxima[i] = best;
        }
        return maxima;
    }

    // the s-th smallest of the per-transform maxima
    double critical_value(const IndexSet& rejected, double level) const {
        std::vector<double> maxima = remaining_maxima(rejected);
        std::size_t s = quantile_index(r_, level);
        std::nth_element(maxima.begin(), maxima.begin() + (s - 1), maxima.end());
        return maxima[s - 1];
    }

    // smallest level at which `stat` strictly exceeds the critical value
    double inverse_level(const IndexSet& rejected, double stat) const {
        std::vector<double> maxima = remaining_maxima(rejected);
        std::size_t cnt = 0;
        for (double m : maxima)
            if (m < stat) ++cnt;
        if (cnt == 0) return 1.0;
        return static_cast<double>(r_ - cnt) / static_cast<double>(r_);
    }

private:
    std::size_t r_;
    std::size_t n_;
    std::vector<double> observed_;
    std::vector<double> table_;
    std::map<std::string, std::string> meta_;
};

// Critical-value schedule over a fixed evidence table: every hypothesis
// shares the same per-step value, the order statistic of the remaining-set
// maxima.  Rejection compares statistics strictly.
inline Schedule maxT_schedule(std::shared_ptr<const ResamplingEvidence> evidence) {
    Schedule s;
    s.id = "maxT";
    s.comparison = Comparison::strict_exceed;
    s.justification = Justification::resampling;
    s.assumptions["null-invariance"] = "asserted by caller";
    s.alpha_of = [evidence](std::size_t, const IndexSet& rejected, double level) {
        return evidence->critical_value(rejected, level);
    };
    s.inverse_alpha = [evidence](std::size_t h, const IndexSet& rejected, double stat) {
        (void)h;
        return evidence->inverse_level(rejected, stat);
    };
    return s;
}

// Full step-down run: reject everything whose observed statistic strictly
// exceeds the current threshold, shrink the maxima to the survivors, repeat.
inline ProcedureTrace stepdown_maxT(const StatisticFamily& stats, const DataMatrix& data,
                                    const TransformGroup& group, double level) {
    auto evidence = std::make_shared<const ResamplingEvidence>(stats, data, group);
    Schedule sched = maxT_schedule(evidence);
    ProcedureTrace trace = run(sched, evidence->observed(), level);
    // thresholds must only ever fall as the rejection set grows
    double last = std::numeric_limits<double>::infinity();
    for (const TraceStep& step : trace.steps) {
        if (step.critical_values.empty()) continue;
        double k = step.critical_values.front().second;
        if (k > last + 1e-12)
            throw std::logic_error("stepdown_maxT: threshold rose between steps");
        last = k;
    }
    for (const auto& [key, value] : evidence->metadata()) trace.metadata[key] = value;
    trace.metadata["procedure"] = "maxT";
    trace.metadata["quantile rank"] =
        std::to_string(quantile_index(evidence->group_size(), level));
    return trace;
}

}  // namespace seqrej
