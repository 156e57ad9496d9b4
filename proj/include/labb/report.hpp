#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "labb/metrics.hpp"
#include "labb/randomstrat.hpp"
#include "labb/universe.hpp"

namespace labb {

using json = nlohmann::json;

inline json to_json(const UniverseSnapshot& snap) {
    json members = json::array();
    for (const auto& m : snap.members)
        members.push_back({{"id", m.id}, {"cap_rank", m.cap_rank}, {"market_cap", m.market_cap}});
    return {{"as_of", snap.as_of.to_string()},
            {"mode", to_string(snap.mode)},
            {"n_requested", snap.n_requested},
            {"period_start", snap.period_start.to_string()},
            {"period_end", snap.period_end.to_string()},
            {"dropped_untradable", snap.dropped_untradable},
            {"members", std::move(members)}};
}

inline json to_json(const MetricsReport& rep) {
    json j = {{"label", rep.label},
              {"cagr_continuous", rep.cagr_continuous},
              {"max_drawdown", rep.max_drawdown},
              {"n_observations", rep.n_observations},
              {"period_start", rep.period_start.to_string()},
              {"period_end", rep.period_end.to_string()}};
    if (rep.sharpe_defined)
        j["sharpe_annualized"] = rep.sharpe_annualized;
    else
        j["sharpe_annualized"] = nullptr;
    return j;
}

inline json to_json(const TTestResult& t) {
    return {{"t_statistic", t.t_statistic}, {"p_value", t.p_value}, {"dof", t.dof}};
}

inline json to_json(const EnsembleReport& rep) {
    json runs = json::array();
    for (const auto& r : rep.runs) {
        json jr = to_json(r.metrics);
        jr["realized_mean_leverage"] = r.realized_mean_leverage;
        jr["realized_mean_holding_days"] = r.realized_mean_holding_days;
        jr["n_trades"] = r.n_trades;
        runs.push_back(std::move(jr));
    }
    return {{"runs", std::move(runs)},
            {"mean_cagr", rep.mean_cagr},
            {"std_cagr", rep.std_cagr},
            {"mean_sharpe", rep.mean_sharpe},
            {"std_sharpe", rep.std_sharpe},
            {"sharpe_undefined_runs", rep.sharpe_undefined_runs},
            {"realized_mean_leverage", rep.realized_mean_leverage},
            {"realized_mean_holding_days", rep.realized_mean_holding_days},
            {"config",
             {{"target_mean_leverage", rep.config.target_mean_leverage},
              {"mean_holding_days", rep.config.mean_holding_days},
              {"positions_max", rep.config.positions_max},
              {"ensemble_size", rep.config.ensemble_size},
              {"master_seed", rep.config.master_seed},
              {"duration_model", to_string(rep.config.duration_model)},
              {"periods_per_year", rep.config.periods_per_year},
              {"universe", to_json(rep.config.universe)}}}};
}

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

} // namespace labb
