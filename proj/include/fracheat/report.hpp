#pragma once

// Result serialization: solve reports, condition-check verdicts, and sweep
// tables rendered to JSON / CSV with deterministic bytes (fixed key order,
// round-trip float formatting, no timestamps).

#include <string>
#include <vector>

#include <json.hpp>

#include "fracheat/io.hpp"
#include "fracheat/solvability.hpp"
#include "fracheat/solver.hpp"

namespace fracheat {

inline ordered_json solve_report_to_json(const MildSolveReport& rep) {
    ordered_json j;
    j["verdict"] = to_string(rep.verdict);
    j["T_reached"] = rep.T_reached;
    j["refinement_stable"] = rep.refinement_stable;
    j["iterations"] = rep.iterations;
    j["first_exceed_step"] = rep.first_exceed_step;
    j["nan_seen"] = rep.nan_seen;
    j["monotone_defect"] = rep.monotone_defect;
    j["parameters"] = {{"T", rep.T},
                       {"dt", rep.dt},
                       {"tol", rep.tol},
                       {"cap", rep.cap},
                       {"points", rep.points},
                       {"half_width", rep.half_width},
                       {"dim", rep.dim}};
    j["u0_hash"] = hex64(rep.u0_hash);
    j["sup_history"] = rep.sup_history;
    j["residual_history"] = rep.residual_history;
    return j;
}

inline ordered_json solvability_to_json(const SolvabilityVerdict& v) {
    ordered_json j;
    j["kind"] = condition_kind_name(v.kind);
    j["witness_x"] = v.witness_x;
    j["witness_t"] = v.witness_t;
    j["witness_value"] = v.witness_value;
    j["worst_ratio"] = v.worst_ratio;
    if (v.beta > 0.0) {
        j["beta"] = v.beta;
        j["delta"] = v.delta;
        j["eps"] = v.eps;
        j["tau_star"] = v.tau_star;
        j["kappa"] = v.kappa;
    }
    if (v.Cstar > 0.0) {
        j["Cstar"] = v.Cstar;
        j["Tstar"] = v.Tstar;
    }
    if (!v.detail.empty()) j["detail"] = v.detail;
    return j;
}

inline ordered_json sweep_row_to_json(const LambdaSweepRow& r) {
    return ordered_json{{"lambda", r.lambda},
                        {"verdict", to_string(r.verdict)},
                        {"T_reached", r.T_reached},
                        {"sup_final", r.sup_final},
                        {"residual_final", r.residual_final},
                        {"refinement_stable", r.refinement_stable}};
}

inline ordered_json bracket_to_json(const LambdaBracket& b) {
    ordered_json j;
    j["lambda_lo"] = b.lo;
    j["lambda_hi"] = b.hi;
    j["width_factor"] = (b.lo > 0.0 && std::isfinite(b.hi)) ? b.hi / b.lo : kInf;
    j["bisection_hit_inconclusive"] = b.bisection_hit_inconclusive;
    ordered_json rows = ordered_json::array();
    for (const auto& r : b.rows) rows.push_back(sweep_row_to_json(r));
    j["rows"] = std::move(rows);
    return j;
}

/// Sweep table: one comment line tying the file to its run, then the fixed
/// column set, one row per lambda in ascending order.
inline std::string sweep_csv_text(const std::vector<LambdaSweepRow>& rows,
                                  const std::string& config_hash) {
    std::string out = "# config=" + config_hash + "\n";
    out += "lambda,verdict,T_reached,sup_final,residual_final,refinement_stable\n";
    for (const auto& r : rows) {
        out += full_precision(r.lambda);
        out += ',';
        out += to_string(r.verdict);
        out += ',';
        out += full_precision(r.T_reached);
        out += ',';
        out += full_precision(r.sup_final);
        out += ',';
        out += full_precision(r.residual_final);
        out += ',';
        out += r.refinement_stable ? '1' : '0';
        out += '\n';
    }
    return out;
}

} // namespace fracheat
