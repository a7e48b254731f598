#include "spinport/report_json.hpp"

namespace spinport {

namespace {

using nlohmann::ordered_json;

ordered_json moments_json(const protocols::SystemReport& rep) {
    ordered_json j;
    j["label"] = rep.label;
    j["mean"] = {rep.mean[0], rep.mean[1]};
    j["cov"] = {{rep.cov[0], rep.cov[1]}, {rep.cov[2], rep.cov[3]}};
    if (rep.mean_se.has_value()) j["mean_se"] = {(*rep.mean_se)[0], (*rep.mean_se)[1]};
    if (rep.var_se.has_value()) j["var_se"] = {(*rep.var_se)[0], (*rep.var_se)[1]};
    return j;
}

}  // namespace

ordered_json to_json(const protocols::ProtocolReport& report) {
    ordered_json j;
    j["schema"] = report.schema;
    j["protocol"] = report.protocol;
    j["engine"] = report.engine;
    j["config"] = {{"r", report.r},
                   {"kappa", report.kappa},
                   {"readout_ratio", report.readout_ratio},
                   {"shots", report.shots},
                   {"seed", report.seed}};
    j["signals"] = report.signal_labels;
    j["inputs"] = ordered_json::array();
    for (const auto& input : report.inputs) j["inputs"].push_back(moments_json(input));
    j["outputs"] = ordered_json::array();
    for (const auto& out : report.outputs) {
        ordered_json o = moments_json(out.moments);
        o["gain"] = out.gain;
        o["added_noise"] = {out.added_noise[0], out.added_noise[1]};
        if (out.fidelity_coherent.has_value())
            o["fidelity_coherent"] = *out.fidelity_coherent;
        else
            o["fidelity_coherent"] = nullptr;
        j["outputs"].push_back(std::move(o));
    }
    j["measurements"] = ordered_json::array();
    for (const auto& m : report.measurements) {
        ordered_json o;
        o["id"] = m.id;
        o["mode"] = m.mode_label;
        o["angle"] = m.angle;
        o["mean"] = m.mean;
        if (m.variance.has_value())
            o["variance"] = *m.variance;
        else
            o["variance"] = nullptr;
        if (m.mean_se.has_value()) o["mean_se"] = *m.mean_se;
        j["measurements"].push_back(std::move(o));
    }
    j["primary_output"] = report.primary_output;
    if (report.fidelity_coherent.has_value())
        j["fidelity_coherent"] = *report.fidelity_coherent;
    else
        j["fidelity_coherent"] = nullptr;
    j["warnings"] = report.warnings;
    return j;
}

ordered_json to_json(const heisenberg::PropagationTable<double>& table,
                     const std::vector<std::string>& mode_labels,
                     const std::vector<std::string>& outcome_names) {
    auto symbol_name = [&](int sym) {
        const auto mode = static_cast<std::size_t>(sym / 2);
        const char* quad = sym % 2 == 0 ? "x" : "p";
        return std::string(quad) + "(" + mode_labels.at(mode) + ")";
    };
    auto expr_json = [&](const heisenberg::OperatorExpr<double>& expr) {
        ordered_json j;
        ordered_json coeffs = ordered_json::object();
        for (const auto& [sym, c] : expr.coeffs) coeffs[symbol_name(sym)] = c;
        j["initial_terms"] = std::move(coeffs);
        ordered_json outs = ordered_json::object();
        for (const auto& [id, c] : expr.outcome_terms)
            outs[outcome_names.at(static_cast<std::size_t>(id))] = c;
        j["outcome_terms"] = std::move(outs);
        j["constant"] = expr.constant;
        return j;
    };

    ordered_json j;
    j["schema"] = "spinport-oracle/1";
    ordered_json rows = ordered_json::object();
    for (int mode = 0; mode < table.n_modes; ++mode) {
        if (table.mode_dead[static_cast<std::size_t>(mode)]) continue;
        for (int quad = 0; quad < 2; ++quad) {
            const auto& expr = table.ops[static_cast<std::size_t>(2 * mode + quad)];
            rows[symbol_name(2 * mode + quad)] = expr_json(table.substituted(expr));
        }
    }
    j["final_operators"] = std::move(rows);
    ordered_json outcomes = ordered_json::object();
    for (std::size_t k = 0; k < table.outcomes.size(); ++k)
        outcomes[outcome_names.at(k)] = expr_json(table.outcomes[k]);
    j["outcomes"] = std::move(outcomes);
    return j;
}

}  // namespace spinport
