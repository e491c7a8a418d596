#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "igsim/inferkit/frame.hpp"
#include "igsim/ledger/annotate.hpp"
#include "igsim/ledger/event_log.hpp"

namespace igsim::ledger {

struct PanelOptions {
    bool social_only = false;  // offset base counts only social actions
};

struct HourlyPanelRow {
    std::string run_id;
    std::string agent;
    int agent_index = 0;
    std::string group;
    bool minority = false;
    long hour = 0;

    long hostile_count = 0;
    long total_actions = 0;  // offset base
    long social_actions = 0;
    long contact_count = 0;
    long hate_count = 0;
    long conversation_count = 0;

    std::optional<long> hostile_lag, total_lag, contact_lag, hate_lag, conversation_lag;

    std::map<std::string, double> attitudes;      // scale -> mean response, NaN when not probed
    std::map<std::string, double> attitudes_lag;  // NaN at hour 0 or when not probed

    int realistic = 0, symbolic = 0, segregated = 0, asymmetric = 0;
};

/// Dense (agent, hour) panel for one run; hours 0..header.hours-1.
std::vector<HourlyPanelRow> build_hourly_panel(const StreamHeader& header, const std::vector<AnnotatedEvent>& events,
                                               const std::vector<world::ProbeRecord>& probes,
                                               const PanelOptions& opts = {});

/// Concatenates run panels; a repeated (run, agent, hour) raises IntegrityError.
std::vector<HourlyPanelRow> concat_panels(const std::vector<std::vector<HourlyPanelRow>>& panels);

struct SystemPanelRow {
    std::string run_id;
    long hour = 0;
    long hostile_count = 0, total_actions = 0, social_actions = 0, contact_count = 0, hate_count = 0,
         conversation_count = 0;
    std::optional<long> hostile_lag, total_lag, contact_lag, hate_lag, conversation_lag;
    int realistic = 0, symbolic = 0, segregated = 0, asymmetric = 0;
};

/// Per (run, hour) sums; every hour of every run present.
std::vector<SystemPanelRow> aggregate_system(const std::vector<HourlyPanelRow>& panel);

/// Column order of the agent panel CSV.
const std::vector<std::string>& panel_columns();
const std::vector<std::string>& system_columns();

/// Model-ready frames: counts, lags, lagged rates (lag count / lag offset,
/// 0 when the lagged offset is 0), condition flags and the z-scored hour.
inferkit::Frame panel_frame(const std::vector<HourlyPanelRow>& panel);
inferkit::Frame system_frame(const std::vector<SystemPanelRow>& rows);

}  // namespace igsim::ledger
