#pragma once

#include "exitmoments/errors.hpp"
#include "exitmoments/moments.hpp"
#include "exitmoments/profile.hpp"
#include "exitmoments/warping.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace exitmoments {

// ============================================================================
// Criterion predicates for cylinders, horocylinders, cones and wedges
// ============================================================================
//
// Each check computes the criterion threshold and mirrors the comparison
// direction of the underlying statement: the cylinder and cone tests are
// non-strict, the horocylinder test is strict. Verdicts are answers, not
// errors; a false verdict reports normally.

struct CriterionReport {
    std::string criterion_id;
    bool verdict = false;
    double threshold = 0.0;
    nlohmann::json input_echo;
    std::optional<double> bound;
    std::vector<std::string> notes;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["criterion_id"] = criterion_id;
        j["verdict"] = verdict;
        j["threshold"] = threshold;
        j["input_echo"] = input_echo;
        if (bound)
            j["bound"] = *bound;
        else
            j["bound"] = nullptr;
        j["notes"] = notes;
        return j;
    }

    static CriterionReport from_json(const nlohmann::json& j) {
        CriterionReport r;
        r.criterion_id = j.at("criterion_id").get<std::string>();
        r.verdict = j.at("verdict").get<bool>();
        r.threshold = j.at("threshold").get<double>();
        r.input_echo = j.at("input_echo");
        if (!j.at("bound").is_null()) r.bound = j.at("bound").get<double>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        return r;
    }
};

// Cylindrically bounded case: projection contained in a ball of radius r_d of
// a factor with radial curvature <= -G <= 0.
struct CylinderCase {
    int m = 2;
    int l = 1;
    CurvatureProfile profile = CurvatureProfile::constant(0.0);
    double r_d = 1.0;
    double max_h = 0.0;  // sup of the mean curvature norm on the domain
    double eta = 1.0;
};

struct WedgeCase {
    int m = 2;
    int n = 2;
    int l = 1;
    int k = 0;
    double alpha = 1.0;
};

// max |H| <= (m - l - eta) h'/h(r_d); when it holds, the mean exit time is
// bounded by the eta-weighted radial integral.
inline CriterionReport check_cylinder(const CylinderCase& c) {
    if (c.l < 0 || c.m < c.l + 1) throw OutOfRange("need m >= l + 1");
    if (!(c.eta > 0.0)) throw EtaNonPositive("eta must be positive");
    if (!(c.r_d > 0.0)) throw OutOfRange("r_d must be positive");
    if (c.max_h < 0.0) throw OutOfRange("max |H| must be >= 0");

    WarpingFunction w = solve_warping(c.profile, c.r_d);
    double slope = log_derivative(w, c.r_d);
    double coeff = static_cast<double>(c.m - c.l) - c.eta;

    CriterionReport rep;
    rep.criterion_id = "cylinder";
    rep.threshold = coeff * slope;
    rep.verdict = c.max_h <= rep.threshold;
    rep.input_echo = {{"m", c.m},       {"l", c.l},     {"eta", c.eta},
                      {"r_d", c.r_d},   {"max_h", c.max_h}, {"profile", c.profile.to_json()}};
    if (coeff < 0.0)
        rep.notes.push_back("eta > m - l: threshold is negative and the criterion is vacuous");
    if (rep.verdict)
        rep.bound = cylinder_mean_exit_bound(BoundSpec(c.m, c.l, c.eta, c.r_d, w));
    return rep;
}

// Horoball case: max |H| < (m - l) sqrt(b) coth(sqrt(b) r_d), strict. The
// comparison is evaluated as mu <= 1 or sqrt(b) r_d < atanh(1/mu) with
// mu = max|H| / ((m - l) sqrt(b)): coth rounds to 1 in double arithmetic for
// large arguments, which would falsify the comparison even though
// coth > 1 holds for every finite radius.
inline CriterionReport check_horocylinder(int m, int l, double b, double r_d, double max_h) {
    if (!(b > 0.0)) throw NonPositiveB("need b > 0 (Sec <= -b < 0)");
    if (l < 0 || m < l + 1) throw OutOfRange("need m >= l + 1");
    if (!(r_d > 0.0)) throw OutOfRange("r_d must be positive");
    if (max_h < 0.0) throw OutOfRange("max |H| must be >= 0");

    double scale = static_cast<double>(m - l) * std::sqrt(b);
    double x = std::sqrt(b) * r_d;
    double mu = max_h / scale;

    CriterionReport rep;
    rep.criterion_id = "horocylinder";
    rep.threshold = scale / std::tanh(x);
    rep.verdict = mu <= 1.0 || x < std::atanh(1.0 / mu);
    rep.input_echo = {{"m", m}, {"l", l}, {"b", b}, {"r_d", r_d}, {"max_h", max_h}};
    rep.notes.push_back("verdict only: the exit-time constant is not explicit");
    if (rep.verdict && max_h >= rep.threshold)
        rep.notes.push_back("threshold within rounding of max |H|; exact comparison used");
    return rep;
}

// Wedge case: gamma = m - (alpha^2 + 1) l - k must be positive.
inline CriterionReport check_wedge(const WedgeCase& c) {
    if (c.n < 1 || c.l < 1 || c.k < 0) throw OutOfRange("need n >= 1, l >= 1, k >= 0");
    if (!(c.alpha > 0.0)) throw OutOfRange("alpha must be positive");
    double gamma = static_cast<double>(c.m) -
                   (c.alpha * c.alpha + 1.0) * static_cast<double>(c.l) - static_cast<double>(c.k);
    CriterionReport rep;
    rep.criterion_id = "wedge";
    rep.threshold = gamma;
    rep.verdict = gamma > 0.0;
    rep.input_echo = {{"m", c.m}, {"n", c.n}, {"l", c.l}, {"k", c.k}, {"alpha", c.alpha}};
    if (c.n < 2) rep.notes.push_back("n < 2 is outside the comparison hypothesis; verdict is formal");
    return rep;
}

// Cone aperture test tan(theta) <= sqrt(m-1), evaluated in the angle domain
// theta <= arctan(sqrt(m-1)) so the boundary cases are exact.
inline CriterionReport check_cone(int m, double theta) {
    if (m < 2) throw OutOfRange("need m >= 2");
    if (!(theta > 0.0) || theta >= std::numbers::pi / 2.0)
        throw DegenerateCone("cone half-angle must lie in (0, pi/2)");
    CriterionReport rep;
    rep.criterion_id = "cone";
    rep.threshold = std::atan(std::sqrt(static_cast<double>(m - 1)));
    rep.verdict = theta <= rep.threshold;
    rep.input_echo = {{"m", m}, {"theta", theta}};
    return rep;
}

// ============================================================================
// Batch mode: JSON cases in, reports out, optional CSV summary
// ============================================================================

inline CriterionReport run_criterion_case(const nlohmann::json& j) {
    const std::string id = j.at("criterion").get<std::string>();
    if (id == "cylinder") {
        CylinderCase c{j.at("m").get<int>(),
                       j.at("l").get<int>(),
                       CurvatureProfile::from_json(j.at("profile")),
                       j.at("r_d").get<double>(),
                       j.at("max_h").get<double>(),
                       j.at("eta").get<double>()};
        return check_cylinder(c);
    }
    if (id == "horocylinder")
        return check_horocylinder(j.at("m").get<int>(), j.at("l").get<int>(),
                                  j.at("b").get<double>(), j.at("r_d").get<double>(),
                                  j.at("max_h").get<double>());
    if (id == "wedge") {
        WedgeCase c{j.at("m").get<int>(), j.value("n", 2), j.at("l").get<int>(),
                    j.at("k").get<int>(), j.at("alpha").get<double>()};
        return check_wedge(c);
    }
    if (id == "cone") return check_cone(j.at("m").get<int>(), j.at("theta").get<double>());
    throw OutOfRange("unknown criterion '" + id + "'");
}

inline std::vector<CriterionReport> run_criteria_batch(const nlohmann::json& cases) {
    if (!cases.is_array()) throw OutOfRange("batch input must be a JSON array");
    std::vector<CriterionReport> out;
    out.reserve(cases.size());
    for (const auto& c : cases) out.push_back(run_criterion_case(c));
    return out;
}

inline void export_reports_csv(const std::vector<CriterionReport>& reports, std::ostream& out) {
    out << "criterion_id,verdict,threshold\n";
    char buf[64];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%.12g", r.threshold);
        out << r.criterion_id << "," << (r.verdict ? "true" : "false") << "," << buf << "\n";
    }
}

}  // namespace exitmoments
