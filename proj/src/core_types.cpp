#include "lcpms/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lcpms {

Interval::Interval(double center, double half_width) : center_(center), half_width_(half_width) {
    if (std::isnan(center) || std::isnan(half_width) || half_width < 0.0) {
        throw std::invalid_argument("Interval: half_width must be a nonnegative number");
    }
}

bool Interval::contains(double y) const noexcept {
    return std::abs(y - center_) <= half_width_;
}

double interval_length(const Interval& iv) noexcept { return iv.length(); }

void IntervalUnion::insert(Segment s) {
    if (std::isnan(s.lo) || std::isnan(s.hi) || s.lo > s.hi) {
        throw std::invalid_argument("IntervalUnion: segment with lo > hi");
    }
    // First part whose right end reaches s.lo; everything before it stays.
    auto first = std::lower_bound(parts_.begin(), parts_.end(), s.lo,
                                  [](const Segment& p, double lo) { return p.hi < lo; });
    auto last = first;
    while (last != parts_.end() && last->lo <= s.hi) {
        s.lo = std::min(s.lo, last->lo);
        s.hi = std::max(s.hi, last->hi);
        ++last;
    }
    first = parts_.erase(first, last);
    parts_.insert(first, s);
}

double IntervalUnion::measure() const noexcept {
    double total = 0.0;
    for (const auto& p : parts_) total += p.length();
    return total;
}

bool IntervalUnion::contains(double y) const noexcept {
    auto it = std::lower_bound(parts_.begin(), parts_.end(), y,
                               [](const Segment& p, double v) { return p.hi < v; });
    return it != parts_.end() && it->lo <= y;
}

IntervalUnion union_insert(IntervalUnion u, Segment s) {
    u.insert(s);
    return u;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("euclidean_distance: dimension mismatch");
    }
    if (a.size() == 1) return std::abs(a[0] - b[0]);
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

Dataset::Dataset(std::size_t dim, std::vector<double> xs, std::vector<double> ys)
    : dim_(dim), xs_(std::move(xs)), ys_(std::move(ys)) {
    if (dim_ == 0) throw std::invalid_argument("Dataset: covariate dimension must be positive");
    if (ys_.empty()) throw std::invalid_argument("Dataset: at least one point required");
    if (xs_.size() != ys_.size() * dim_) {
        throw std::invalid_argument("Dataset: covariate storage does not match n * dim");
    }
}

Dataset Dataset::from_1d(std::vector<double> xs, std::vector<double> ys) {
    return Dataset(1, std::move(xs), std::move(ys));
}

std::string_view to_string(KernelFamily family) noexcept {
    switch (family) {
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::Gaussian: return "gaussian";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "exponential") return KernelFamily::Exponential;
    if (name == "gaussian") return KernelFamily::Gaussian;
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily family, double bandwidth) : family_(family), bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw std::invalid_argument("KernelSpec: bandwidth must be positive and finite");
    }
}

double KernelSpec::weight_at_distance(double d) const noexcept {
    const double u = d / bandwidth_;
    return family_ == KernelFamily::Exponential ? std::exp(-u) : std::exp(-u * u);
}

GammaGrid::GammaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("GammaGrid: empty grid");
    for (std::size_t g = 0; g < values_.size(); ++g) {
        const double v = values_[g];
        if (!(v > 0.0 && v < 1.0)) {
            throw std::invalid_argument("GammaGrid: values must lie in (0, 1)");
        }
        if (g > 0 && !(values_[g - 1] < v)) {
            throw std::invalid_argument("GammaGrid: values must be strictly increasing");
        }
    }
}

GammaGrid GammaGrid::uniform(double lo, double hi, double step) {
    if (!(step > 0.0) || !(lo <= hi)) {
        throw std::invalid_argument("GammaGrid: need step > 0 and lo <= hi");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> values(count);
    // Steps like 0.01 are generated as (a + j) / 100 so that the values are
    // the nearest doubles to the decimal levels.
    const double per_unit = std::round(1.0 / step);
    const double offset = std::round(lo * per_unit);
    const bool decimal = std::abs(per_unit * step - 1.0) < 1e-9 && std::abs(lo * per_unit - offset) < 1e-6;
    for (std::size_t j = 0; j < count; ++j) {
        const auto jd = static_cast<double>(j);
        values[j] = decimal ? (offset + jd) / per_unit : lo + jd * step;
    }
    return GammaGrid(std::move(values));
}

GammaGrid GammaGrid::standard() {
    std::vector<double> values(99);
    for (int j = 1; j <= 99; ++j) values[j - 1] = j / 100.0;
    return GammaGrid(std::move(values));
}

}  // namespace lcpms
