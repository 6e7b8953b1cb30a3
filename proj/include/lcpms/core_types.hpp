#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace lcpms {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Closed symmetric interval [center - half_width, center + half_width].
/// A half-width of +inf is a legal value and means the whole real line.
class Interval {
public:
    Interval() = default;
    Interval(double center, double half_width);

    [[nodiscard]] double center() const noexcept { return center_; }
    [[nodiscard]] double half_width() const noexcept { return half_width_; }
    [[nodiscard]] double lo() const noexcept { return center_ - half_width_; }
    [[nodiscard]] double hi() const noexcept { return center_ + half_width_; }
    [[nodiscard]] double length() const noexcept { return 2.0 * half_width_; }

    /// Endpoints count as covered.
    [[nodiscard]] bool contains(double y) const noexcept;

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double center_ = 0.0;
    double half_width_ = 0.0;
};

[[nodiscard]] double interval_length(const Interval& iv) noexcept;

/// Closed segment [lo, hi] with lo <= hi.
struct Segment {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double length() const noexcept { return hi - lo; }
    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Finite union of closed segments kept in canonical form: sorted by left
/// endpoint and pairwise separated (prev.hi < next.lo).
class IntervalUnion {
public:
    IntervalUnion() = default;

    void insert(Segment s);
    void insert(const Interval& iv) { insert(Segment{iv.lo(), iv.hi()}); }

    [[nodiscard]] const std::vector<Segment>& parts() const noexcept { return parts_; }
    [[nodiscard]] bool empty() const noexcept { return parts_.empty(); }
    [[nodiscard]] double measure() const noexcept;
    [[nodiscard]] bool contains(double y) const noexcept;

    friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

private:
    std::vector<Segment> parts_;
};

/// Throws std::invalid_argument when s.lo > s.hi or an endpoint is NaN.
[[nodiscard]] IntervalUnion union_insert(IntervalUnion u, Segment s);

/// Euclidean distance between two covariates of equal dimension.
[[nodiscard]] double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Calibration or training sample. Covariates are stored row-major.
class Dataset {
public:
    Dataset(std::size_t dim, std::vector<double> xs, std::vector<double> ys);

    static Dataset from_1d(std::vector<double> xs, std::vector<double> ys);

    [[nodiscard]] std::size_t size() const noexcept { return ys_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::span<const double> x(std::size_t i) const noexcept {
        return {xs_.data() + i * dim_, dim_};
    }
    [[nodiscard]] double y(std::size_t i) const noexcept { return ys_[i]; }
    [[nodiscard]] std::span<const double> ys() const noexcept { return ys_; }
    [[nodiscard]] std::span<const double> xs() const noexcept { return xs_; }

private:
    std::size_t dim_;
    std::vector<double> xs_;
    std::vector<double> ys_;
};

enum class KernelFamily { Exponential, Gaussian };

[[nodiscard]] std::string_view to_string(KernelFamily family) noexcept;
/// Accepts "exponential" or "gaussian"; throws std::invalid_argument otherwise.
[[nodiscard]] KernelFamily kernel_family_from_string(std::string_view name);

/// Localizer H(x, x') = exp(-d/h) or exp(-d^2/h^2) with d the Euclidean distance.
class KernelSpec {
public:
    KernelSpec(KernelFamily family, double bandwidth);

    [[nodiscard]] KernelFamily family() const noexcept { return family_; }
    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }

    [[nodiscard]] double weight_at_distance(double d) const noexcept;
    [[nodiscard]] double weight(std::span<const double> a, std::span<const double> b) const {
        return weight_at_distance(euclidean_distance(a, b));
    }

private:
    KernelFamily family_;
    double bandwidth_;
};

/// Strictly increasing miscoverage levels inside (0, 1).
class GammaGrid {
public:
    explicit GammaGrid(std::vector<double> values);

    /// {lo, lo + step, ...} up to hi (inclusive up to rounding of the step count).
    static GammaGrid uniform(double lo, double hi, double step);
    /// {0.01, 0.02, ..., 0.99}.
    static GammaGrid standard();

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t g) const noexcept { return values_[g]; }
    [[nodiscard]] double front() const noexcept { return values_.front(); }
    [[nodiscard]] double back() const noexcept { return values_.back(); }

private:
    std::vector<double> values_;
};

}  // namespace lcpms
