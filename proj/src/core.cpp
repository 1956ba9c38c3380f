#include "bowsim/core.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

namespace bowsim {

void StringModel::validate() const {
    if (!(m > 0.0)) throw ModelError("StringModel: m must be > 0");
    if (!(V > 0.0)) throw ModelError("StringModel: V must be > 0");
    if (!(s > 0.0)) throw ModelError("StringModel: s must be > 0");
    if (rho < 0.0) throw ModelError("StringModel: rho must be >= 0");
    if (!(hbar > 0.0)) throw ModelError("StringModel: hbar must be > 0");
}

StringModel StringModel::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    StringModel model;
    model.m = j.at("m").get<double>();
    model.V = j.at("V").get<double>();
    model.rho = j.at("rho").get<double>();
    model.s = j.at("s").get<double>();
    model.hbar = j.value("hbar", 1.0);
    model.validate();
    return model;
}

Scales derive_scales(const StringModel& model) {
    model.validate();
    if (model.rho == 0.0)
        throw InfiniteCoherenceError("derive_scales: rho = 0, free particle, xi undefined");
    Scales sc;
    sc.gamma = model.gamma();
    sc.v0 = std::sqrt(2.0 * model.V / model.m);
    sc.xi = sc.v0 / (std::numbers::pi * sc.gamma);
    sc.xi_q = std::sqrt(model.hbar / (model.m * sc.gamma));
    sc.semiclassical = model.semiclassical();
    return sc;
}

ReducedUnits::ReducedUnits(const StringModel& model)
    : scales_(derive_scales(model)), V_(model.V), hbar_(model.hbar) {}

double ReducedUnits::factor(Quantity kind) const {
    switch (kind) {
        case Quantity::time: return scales_.gamma;
        case Quantity::length: return 1.0 / scales_.xi;
        case Quantity::energy: return 1.0 / V_;
        case Quantity::velocity: return 1.0 / (scales_.gamma * scales_.xi);
        case Quantity::action: return 1.0 / hbar_;
    }
    throw ModelError("ReducedUnits: unknown quantity kind");
}

double ReducedUnits::to_reduced(double value, Quantity kind) const {
    return value * factor(kind);
}

double ReducedUnits::from_reduced(double value, Quantity kind) const {
    return value / factor(kind);
}

} // namespace bowsim
