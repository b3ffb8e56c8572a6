#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cyfence/sim.hpp"

namespace cyf {

// INI-style document with [plant] [gains] [sim] [attack] [monitor] sections.
// Keys not listed in the schema are rejected. Errors carry origin:line.
SimConfig parse_scenario(std::string_view text, const std::string& origin = "<scenario>");
SimConfig load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const SimConfig& cfg);

// Sets one key as if it appeared in the document.
void set_scenario_value(SimConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value);

extern const char* const kCsvHeader;
std::string format_number(double x);  // 9 significant digits
void write_csv(std::ostream& os, const ScenarioResult& r);
std::string render_summary(const ScenarioResult& r);

void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows);
std::string render_sweep_table(SweepAxis axis, const std::vector<SweepRow>& rows);

struct MarginsReport {
    std::string text;
    int warnings = 0;  // bins with phi_m <= 0 or without a crossover
};
MarginsReport margins_report(const SimConfig& cfg, const std::vector<double>& speeds);

struct BenchReport {
    std::uint64_t iterations;
    double analytic_mean_us;
    double analytic_p99_us;
    double lut_mean_us;
    double lut_p99_us;
};
constexpr std::uint64_t kBenchMinIterations = 100000;
BenchReport bench_monitor(std::uint64_t iterations);
std::string render_bench(const BenchReport& r);

struct TableBlock {
    SweepAxis axis;
    std::vector<double> values;
};
// The five values per tampered quantity used by the detection-time table.
std::vector<TableBlock> table_blocks();

// Writes detection_times.{csv,txt} and stopping_distances.{csv,txt} into dir
// and returns the rendered text.
std::string write_tables(const SimConfig& base, const std::filesystem::path& dir, unsigned workers = 0);

}  // namespace cyf
