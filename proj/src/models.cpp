#include "lcpms/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lcpms/diagnostics.hpp"

namespace lcpms {

namespace {

constexpr double kSingularity = 1e-10;

double scalar(std::span<const double> x) {
    if (x.size() != 1) throw std::invalid_argument("model expects a 1-d covariate");
    return x[0];
}

}  // namespace

SortedSample::SortedSample(const Dataset& train) {
    if (train.dim() != 1) throw std::invalid_argument("1-d learners need a 1-d training set");
    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return train.x(a)[0] < train.x(b)[0]; });
    xs_.reserve(n);
    ys_.reserve(n);
    for (const std::size_t i : order) {
        xs_.push_back(train.x(i)[0]);
        ys_.push_back(train.y(i));
    }
    const auto [lo, hi] = std::minmax_element(ys_.begin(), ys_.end());
    y_min_ = *lo;
    y_max_ = *hi;
    y_mean_ = std::accumulate(ys_.begin(), ys_.end(), 0.0) / static_cast<double>(n);
}

SinusoidFit fit_sinusoid(const std::vector<double>& xs, const std::vector<double>& ys, double lambda,
                         std::size_t first, std::size_t last) {
    if (last < first + 2) return {};
    double ss = 0.0, cc = 0.0, sc = 0.0, sy = 0.0, cy = 0.0;
    for (std::size_t j = first; j < last; ++j) {
        const double s = std::sin(lambda * xs[j]);
        const double c = std::cos(lambda * xs[j]);
        ss += s * s;
        cc += c * c;
        sc += s * c;
        sy += s * ys[j];
        cy += c * ys[j];
    }
    const double scale = ss * cc;
    const double det = scale - sc * sc;
    if (!(scale > 0.0) || det / scale < kSingularity) return {};
    return {(cc * sy - sc * cy) / det, (ss * cy - sc * sy) / det, true};
}

LocalSinusoidModel::LocalSinusoidModel(const Dataset& train, double lambda, double window)
    : train_(train), lambda_(lambda), window_(window) {
    if (!(lambda > 0.0) || !(window > 0.0)) {
        throw std::invalid_argument("LocalSinusoidModel: lambda and window must be positive");
    }
    global_ = fit_sinusoid(train_.xs(), train_.ys(), lambda_, 0, train_.size());
}

double LocalSinusoidModel::predict(std::span<const double> x) const {
    const double at = scalar(x);
    const auto& xs = train_.xs();
    const auto first = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), at - window_) - xs.begin());
    const auto last = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), at + window_) - xs.begin());
    SinusoidFit fit = fit_sinusoid(xs, train_.ys(), lambda_, first, last);
    if (!fit.ok) {
        warn_once(Warning::SinusoidFallback);
        fit = global_;
        if (!fit.ok) return train_.y_mean();
    }
    return fit.a * std::sin(lambda_ * at) + fit.b * std::cos(lambda_ * at);
}

std::string LocalSinusoidModel::describe() const {
    std::ostringstream os;
    os << "sinusoid(lambda=" << lambda_ << ",h=" << window_ << ")";
    return os.str();
}

NadarayaWatsonModel::NadarayaWatsonModel(const Dataset& train, double bandwidth)
    : train_(train), bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("NadarayaWatsonModel: bandwidth must be positive");
}

double NadarayaWatsonModel::predict(std::span<const double> x) const {
    const double at = scalar(x);
    const auto& xs = train_.xs();
    const auto& ys = train_.ys();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double u = (at - xs[j]) / bandwidth_;
        const double w = std::exp(-0.5 * u * u);
        num += w * ys[j];
        den += w;
    }
    if (den == 0.0) {
        warn_once(Warning::NadarayaWatsonFallback);
        const auto it = std::lower_bound(xs.begin(), xs.end(), at);
        std::size_t nearest = static_cast<std::size_t>(it - xs.begin());
        if (nearest == xs.size() || (nearest > 0 && at - xs[nearest - 1] <= xs[nearest] - at)) --nearest;
        return ys[nearest];
    }
    // Rounding can push the ratio a hair outside the convex hull.
    return std::clamp(num / den, train_.y_min(), train_.y_max());
}

std::string NadarayaWatsonModel::describe() const {
    std::ostringstream os;
    os << "nadaraya_watson(h=" << bandwidth_ << ")";
    return os.str();
}

BankSpec parametric_bank_spec() {
    BankSpec spec;
    for (const double lambda : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        for (const double window : {0.5, 1.0}) spec.push_back({ModelFamily::Sinusoid, window, lambda});
    }
    return spec;
}

BankSpec nonparametric_bank_spec() {
    BankSpec spec;
    for (const double h : {0.1, 0.2, 0.4, 0.8, 1.6}) spec.push_back({ModelFamily::NadarayaWatson, h, 0.0});
    return spec;
}

ModelBank build_model_bank(const BankSpec& spec, const Dataset& train) {
    if (spec.empty()) throw std::invalid_argument("build_model_bank: empty model bank");
    ModelBank bank;
    bank.reserve(spec.size());
    for (const auto& d : spec) {
        switch (d.family) {
            case ModelFamily::Sinusoid:
                bank.push_back(std::make_shared<LocalSinusoidModel>(train, d.lambda, d.bandwidth));
                break;
            case ModelFamily::NadarayaWatson:
                bank.push_back(std::make_shared<NadarayaWatsonModel>(train, d.bandwidth));
                break;
        }
    }
    return bank;
}

}  // namespace lcpms
