#pragma once

#include "exitmoments/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace exitmoments {

// ============================================================================
// CurvatureProfile: the radial curvature bound G >= 0
// ============================================================================
//
// The ambient curvature assumption is Sec <= -G <= 0, so any evaluation that
// produces G < 0 is a caller error, not a numerical event.

class CurvatureProfile {
public:
    struct Constant {
        double b = 0.0;
    };
    struct Polynomial {
        std::vector<double> coefficients;  // c0 + c1 t + c2 t^2 + ...
    };
    struct Tabulated {
        std::vector<std::pair<double, double>> knots;  // (t, G(t)), t strictly increasing
    };

    static CurvatureProfile constant(double b) {
        if (b < 0.0) throw InvalidProfile("constant curvature bound must be >= 0");
        return CurvatureProfile(Constant{b});
    }

    static CurvatureProfile polynomial(std::vector<double> coefficients) {
        if (coefficients.empty()) throw InvalidProfile("polynomial profile needs coefficients");
        return CurvatureProfile(Polynomial{std::move(coefficients)});
    }

    static CurvatureProfile tabulated(std::vector<std::pair<double, double>> knots) {
        if (knots.size() < 2) throw InvalidProfile("tabulated profile needs at least two knots");
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (!(knots[i].first > knots[i - 1].first))
                throw InvalidProfile("tabulated knots must be strictly increasing in t");
        }
        for (const auto& [t, g] : knots) {
            (void)t;
            if (g < 0.0) throw InvalidProfile("tabulated profile has G < 0");
        }
        return CurvatureProfile(Tabulated{std::move(knots)});
    }

    // Evaluates G(t). Throws InvalidProfile if the value comes out negative,
    // which for Polynomial can happen anywhere in the working interval.
    double operator()(double t) const {
        double g = evaluate(t);
        if (g < 0.0) throw InvalidProfile("curvature profile evaluates to G < 0 at t = " + std::to_string(t));
        return g;
    }

    bool is_constant() const { return std::holds_alternative<Constant>(data_); }

    double constant_value() const { return std::get<Constant>(data_).b; }

    const std::variant<Constant, Polynomial, Tabulated>& data() const { return data_; }

    // ---- JSON document form: {"variant": "constant"|"polynomial"|"tabulated", ...} ----

    nlohmann::json to_json() const {
        nlohmann::json j;
        if (const auto* c = std::get_if<Constant>(&data_)) {
            j["variant"] = "constant";
            j["b"] = c->b;
        } else if (const auto* p = std::get_if<Polynomial>(&data_)) {
            j["variant"] = "polynomial";
            j["coefficients"] = p->coefficients;
        } else {
            const auto& tab = std::get<Tabulated>(data_);
            nlohmann::json knots = nlohmann::json::array();
            for (const auto& [t, g] : tab.knots) knots.push_back({t, g});
            j["variant"] = "tabulated";
            j["knots"] = knots;
        }
        return j;
    }

    static CurvatureProfile from_json(const nlohmann::json& j) {
        const std::string variant = j.at("variant").get<std::string>();
        if (variant == "constant") return constant(j.at("b").get<double>());
        if (variant == "polynomial")
            return polynomial(j.at("coefficients").get<std::vector<double>>());
        if (variant == "tabulated") {
            std::vector<std::pair<double, double>> knots;
            for (const auto& row : j.at("knots"))
                knots.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
            return tabulated(std::move(knots));
        }
        throw InvalidProfile("unknown profile variant '" + variant + "'");
    }

private:
    explicit CurvatureProfile(std::variant<Constant, Polynomial, Tabulated> data)
        : data_(std::move(data)) {}

    double evaluate(double t) const {
        if (const auto* c = std::get_if<Constant>(&data_)) return c->b;
        if (const auto* p = std::get_if<Polynomial>(&data_)) {
            double acc = 0.0;
            for (auto it = p->coefficients.rbegin(); it != p->coefficients.rend(); ++it)
                acc = acc * t + *it;
            return acc;
        }
        const auto& knots = std::get<Tabulated>(data_).knots;
        if (t <= knots.front().first) return knots.front().second;
        if (t >= knots.back().first) return knots.back().second;
        auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const auto& kn) { return v < kn.first; });
        auto lo = hi - 1;
        double w = (t - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
    }

    std::variant<Constant, Polynomial, Tabulated> data_;
};

}  // namespace exitmoments
