#pragma once

#include "jdqm/experiment.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace jdqm {

enum class ReportFormat { csv, svg_plot };

/// CSV schema (one header line, then one row per (scheme, delta, p)):
///   scheme,delta,mean_cost,cost_se,p,error,error_ci_lo,error_ci_hi,
///   slope_vs_cost,slope_vs_delta,excluded
/// Slopes are reported as convergence rates: the magnitude of the fitted
/// log-log slope, positive for decaying error. Numbers are written with 17
/// significant digits so a parse-back reproduces the report bit-exactly.
void write_report_csv(const ConvergenceReport& report, std::ostream& out);
ConvergenceReport parse_report_csv(std::istream& in);

/// Dispatch on format; for svg_plot renders the log-log error-vs-cost
/// figure directly from the report.
void emit_report(const ConvergenceReport& report, ReportFormat format, const std::string& path);

/// Cost study table: delta,mean_cost,normalized_cost.
void write_cost_csv(const std::vector<CostRow>& rows, std::ostream& out);

/// Log-log strong error versus mean cost, one series per (scheme, p) with
/// its fitted line.
void write_svg_plot(const ConvergenceReport& report, std::ostream& out);

/// Flat key=value experiment config (comma-separated lists, '#' comments).
/// Unknown keys raise ConfigError. Keys and defaults are documented in the
/// README; deltas accept both decimals and "2^-k".
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(std::istream& in);

} // namespace jdqm
