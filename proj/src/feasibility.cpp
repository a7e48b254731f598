#include "spinport/feasibility.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spinport/spin_light.hpp"

namespace spinport::feasibility {

double vector_polarizability(Transition transition, Branch branch) {
    if (transition == Transition::D1)
        return branch == Branch::FUpper ? 1.0 : -1.0;
    return branch == Branch::FUpper ? -0.5 : 0.5;
}

namespace {

constexpr double kSmallRatio = 0.1;   // "much less than one"
constexpr double kLargeRatio = 10.0;  // "much greater than one"
constexpr double kConsistencyTol = 0.1;
constexpr double kMinPulseDuration = 100e-9;  // saturation limit

void add_check(FeasibilityReport& report, std::string name, bool pass, double value,
               double threshold, std::string formula) {
    report.checks.push_back({name, pass ? CheckStatus::Pass : CheckStatus::Warn, value,
                             threshold, std::move(formula)});
    if (!pass)
        report.warnings.push_back(name + ": value " + std::to_string(value) +
                                  " vs threshold " + std::to_string(threshold));
}

}  // namespace

FeasibilityReport design_report(const PhysicalParams& p) {
    std::vector<std::string> missing;
    if (!p.sigma.has_value() && !p.lambda.has_value()) missing.push_back("sigma (or lambda)");
    if (p.area <= 0.0) missing.push_back("area");
    if (p.gamma <= 0.0) missing.push_back("gamma");
    if (p.delta == 0.0) missing.push_back("delta");
    if (p.spin_f <= 0.0) missing.push_back("F");
    if (p.atom_count <= 0.0) missing.push_back("N");
    if (p.photon_count <= 0.0) missing.push_back("n");
    if (!p.alpha_v.has_value() && !(p.transition.has_value() && p.branch.has_value()))
        missing.push_back("alpha_v (or transition and branch)");
    if (!missing.empty()) {
        std::string message = "missing required fields:";
        for (const auto& name : missing) message += " " + name;
        throw std::invalid_argument(message);
    }

    FeasibilityReport report;
    report.sigma = p.sigma.has_value() ? *p.sigma : p.sigma_scale * (*p.lambda) * (*p.lambda);

    double alpha_from_table = 0.0;
    const bool have_table = p.transition.has_value() && p.branch.has_value();
    if (have_table) alpha_from_table = vector_polarizability(*p.transition, *p.branch);
    report.alpha_v = p.alpha_v.has_value() ? *p.alpha_v : alpha_from_table;
    if (p.alpha_v.has_value() && have_table)
        add_check(report, "alpha_v_consistency",
                  std::abs(*p.alpha_v - alpha_from_table) < 1e-12, *p.alpha_v,
                  alpha_from_table, "alpha_v equals the (transition, branch) table value");

    report.a = spin_light::coupling_a(report.sigma, p.area, p.gamma, p.delta,
                                      report.alpha_v, p.spin_f);
    report.kappa =
        spin_light::coupling_kappa(report.a, p.photon_count, p.atom_count, p.spin_f);
    report.n_required = 2.0 * p.spin_f * p.atom_count;
    report.a_unity = 2.0 / report.n_required;
    report.gamma_over_delta = p.gamma / std::abs(p.delta);
    report.alpha_delta =
        report.sigma * p.atom_count * p.gamma / (p.area * std::abs(p.delta));
    report.sigma_n_over_area = report.sigma * p.atom_count / p.area;
    // Optimal beam cross section: solving A = sigma n |alpha_v| alpha_delta(A) / (2F)
    // for A with alpha_delta = sigma N gamma / (A |delta|) gives
    // A^2 = sigma^2 n N |alpha_v| gamma / (2 F |delta|).
    report.a_optimal = report.sigma * std::sqrt(p.photon_count * p.atom_count *
                                                std::abs(report.alpha_v) * p.gamma /
                                                (2.0 * p.spin_f * std::abs(p.delta)));

    add_check(report, "gamma_over_delta", report.gamma_over_delta <= kSmallRatio,
              report.gamma_over_delta, kSmallRatio, "gamma / |delta| << 1");
    add_check(report, "optical_depth", report.alpha_delta <= kSmallRatio,
              report.alpha_delta, kSmallRatio,
              "alpha_delta = sigma N gamma / (A |delta|) << 1");
    add_check(report, "weak_focusing", p.area / report.sigma >= kLargeRatio,
              p.area / report.sigma, kLargeRatio, "A >> sigma ~ lambda^2");
    add_check(report, "bright_beam", p.photon_count >= 100.0, p.photon_count, 100.0,
              "n >> 1");
    add_check(report, "macroscopic_spin", p.atom_count * p.spin_f >= 100.0,
              p.atom_count * p.spin_f, 100.0, "N F >> 1");
    add_check(report, "unity_photon_number",
              std::abs(p.photon_count / report.n_required - 1.0) <= kConsistencyTol,
              p.photon_count / report.n_required, 1.0, "n = 2 F N");
    add_check(report, "coupling_vs_unity",
              std::abs(std::abs(report.a) / report.a_unity - 1.0) <= kConsistencyTol,
              std::abs(report.a) / report.a_unity, 1.0, "|a| = 2 / n");

    if (p.cell_cm.has_value() && p.density.has_value()) {
        const double volume = (*p.cell_cm)[0] * (*p.cell_cm)[1] * (*p.cell_cm)[2];
        const double implied = *p.density * volume;
        add_check(report, "density_consistency",
                  std::abs(implied / p.atom_count - 1.0) <= kConsistencyTol,
                  implied / p.atom_count, 1.0, "density * cell volume = N");
    }
    if (p.pulse_duration.has_value())
        add_check(report, "pulse_vs_saturation", *p.pulse_duration >= kMinPulseDuration,
                  *p.pulse_duration, kMinPulseDuration, "pulse duration > 100 ns");
    if (p.pulse_duration.has_value() && p.opo_bandwidth.has_value())
        add_check(report, "pulse_vs_source_bandwidth",
                  *p.pulse_duration >= 1.0 / *p.opo_bandwidth, *p.pulse_duration,
                  1.0 / *p.opo_bandwidth, "pulse duration > 1 / source bandwidth");
    return report;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_flat_pairs(const std::string& text) {
    std::map<std::string, std::string> pairs;
    if (trim(text).starts_with("{")) {
        const auto j = nlohmann::json::parse(text);
        for (const auto& [key, value] : j.items()) {
            if (value.is_string())
                pairs[key] = value.get<std::string>();
            else
                pairs[key] = value.dump();
        }
        return pairs;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("params file: expected key = value, got '" + line +
                                        "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        pairs[key] = value;
    }
    return pairs;
}

double to_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("params file: bad number for '" + key + "'");
    }
    if (used != value.size())
        throw std::invalid_argument("params file: bad number for '" + key + "'");
    return parsed;
}

}  // namespace

PhysicalParams parse_params_file(const std::string& text) {
    const auto pairs = parse_flat_pairs(text);
    PhysicalParams p;
    auto get = [&](const char* key) -> std::optional<double> {
        const auto it = pairs.find(key);
        if (it == pairs.end()) return std::nullopt;
        return to_number(key, it->second);
    };

    p.sigma = get("sigma");
    p.lambda = get("lambda");
    if (const auto v = get("sigma_scale")) p.sigma_scale = *v;
    if (const auto v = get("area")) p.area = *v;
    if (const auto v = get("gamma")) p.gamma = *v;
    if (const auto v = get("delta")) p.delta = *v;
    p.alpha_v = get("alpha_v");
    if (const auto it = pairs.find("transition"); it != pairs.end()) {
        if (it->second == "D1")
            p.transition = Transition::D1;
        else if (it->second == "D2")
            p.transition = Transition::D2;
        else
            throw std::invalid_argument("params file: transition must be D1 or D2");
    }
    if (const auto it = pairs.find("branch"); it != pairs.end()) {
        if (it->second == "upper")
            p.branch = Branch::FUpper;
        else if (it->second == "lower")
            p.branch = Branch::FLower;
        else
            throw std::invalid_argument("params file: branch must be upper or lower");
    }
    if (const auto v = get("F")) p.spin_f = *v;
    p.nuclear_i = get("I");
    if (const auto v = get("N")) p.atom_count = *v;
    if (const auto v = get("n")) p.photon_count = *v;
    const auto cx = get("cell_x"), cy = get("cell_y"), cz = get("cell_z");
    if (cx && cy && cz) p.cell_cm = {{*cx, *cy, *cz}};
    p.density = get("density");
    p.pulse_duration = get("pulse_duration");
    p.opo_bandwidth = get("opo_bandwidth");
    return p;
}

}  // namespace spinport::feasibility
