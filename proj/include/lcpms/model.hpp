#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lcpms {

/// A fixed regression function. Implementations are immutable and must be
/// safe to call concurrently.
class Model {
public:
    virtual ~Model() = default;
    [[nodiscard]] virtual double predict(std::span<const double> x) const = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Candidate models in index order. Index order breaks ties in selection.
using ModelBank = std::vector<std::shared_ptr<const Model>>;

class FunctionModel final : public Model {
public:
    using Fn = std::function<double(std::span<const double>)>;

    FunctionModel(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

    [[nodiscard]] double predict(std::span<const double> x) const override { return fn_(x); }
    [[nodiscard]] std::string describe() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

inline std::shared_ptr<const Model> make_function_model(FunctionModel::Fn fn, std::string name) {
    return std::make_shared<FunctionModel>(std::move(fn), std::move(name));
}

}  // namespace lcpms
