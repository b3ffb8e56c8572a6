#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "cyfence/cyfence.h"

namespace {

int fail(cyf_status s) {
    std::cerr << "error: " << cyf_status_string(s) << ": " << cyf_last_error() << '\n';
    return 1;
}

void print_and_free(char* s) {
    std::fputs(s, stdout);
    cyf_string_free(s);
}

struct Scenario {
    cyf_scenario* p = nullptr;
    ~Scenario() { cyf_scenario_free(p); }
};

int cmd_run(const std::string& file, const std::string& out) {
    Scenario sc;
    if (auto s = cyf_scenario_load(file.c_str(), &sc.p)) return fail(s);
    cyf_result* r = nullptr;
    if (auto s = cyf_run(sc.p, &r)) return fail(s);
    int code = 0;
    if (!out.empty()) {
        if (auto s = cyf_result_write_csv(r, out.c_str())) code = fail(s);
    }
    char* summary = nullptr;
    if (cyf_result_summary(r, &summary) == CYF_OK) print_and_free(summary);
    if (code == 0 && cyf_result_status(r) == CYF_RUN_ABORTED) code = 2;
    cyf_result_free(r);
    return code;
}

int cmd_sweep(const std::string& file, const std::string& axis, const std::vector<double>& values,
              const std::string& out, unsigned workers) {
    if (values.empty()) {
        std::cerr << "error: --values is empty\n";
        return 1;
    }
    Scenario sc;
    if (auto s = cyf_scenario_load(file.c_str(), &sc.p)) return fail(s);
    cyf_sweep* sw = nullptr;
    if (auto s = cyf_sweep_run(sc.p, axis.c_str(), values.data(), values.size(), workers, &sw)) return fail(s);
    int code = 0;
    char* text = nullptr;
    if (!out.empty()) {
        if (auto s = cyf_sweep_csv(sw, &text)) {
            code = fail(s);
        } else {
            std::FILE* f = std::fopen(out.c_str(), "wb");
            if (f) {
                std::fputs(text, f);
                std::fclose(f);
            } else {
                std::cerr << "error: cannot write " << out << '\n';
                code = 1;
            }
            cyf_string_free(text);
        }
    }
    if (cyf_sweep_table(sw, &text) == CYF_OK) print_and_free(text);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < cyf_sweep_size(sw); ++i) {
        cyf_sweep_row row;
        if (cyf_sweep_get(sw, i, &row) == CYF_OK && row.status != CYF_RUN_ABORTED) ++ok;
    }
    cyf_sweep_free(sw);
    if (code == 0 && ok == 0) code = 2;
    return code;
}

int cmd_margins(const std::string& file, const std::vector<double>& speeds) {
    Scenario sc;
    if (auto s = cyf_scenario_load(file.c_str(), &sc.p)) return fail(s);
    char* text = nullptr;
    int warnings = 0;
    const double* sp = speeds.empty() ? nullptr : speeds.data();
    if (auto s = cyf_margins_report(sc.p, sp, speeds.size(), &text, &warnings)) return fail(s);
    print_and_free(text);
    if (warnings) std::cerr << "warning: " << warnings << " bin(s) without a positive phase margin\n";
    return 0;
}

int cmd_bench(std::uint64_t iters) {
    cyf_bench_report rep;
    if (auto s = cyf_bench(iters, &rep)) return fail(s);
    char* text = nullptr;
    if (auto s = cyf_bench_render(&rep, &text)) return fail(s);
    print_and_free(text);
    return 0;
}

int cmd_tables(const std::string& file, const std::string& dir, unsigned workers) {
    Scenario sc;
    auto s = file.empty() ? cyf_scenario_default(&sc.p) : cyf_scenario_load(file.c_str(), &sc.p);
    if (s) return fail(s);
    char* text = nullptr;
    if (auto e = cyf_write_tables(sc.p, dir.c_str(), workers, &text)) return fail(e);
    print_and_free(text);
    std::cout << "tables written to " << dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Braking simulator with an isolated runtime monitor"};
    app.require_subcommand(1);

    std::string file, out, axis, dir = "tables", preset;
    std::vector<double> values, speeds;
    unsigned workers = 0;
    std::uint64_t iters = 1000000;

    auto* run = app.add_subcommand("run", "Simulate one scenario");
    run->add_option("file", file, "Scenario file")->required();
    run->add_option("-o,--output", out, "CSV output path");

    auto* sw = app.add_subcommand("sweep", "Run one scenario per value of an attacked quantity");
    sw->add_option("file", file, "Base scenario file")->required();
    sw->add_option("--axis", axis, "Kp, Ki, Kd, setpoint or output")->required();
    sw->add_option("--values", values, "Comma separated values")->required()->delimiter(',');
    sw->add_option("-o,--output", out, "Sweep CSV output path");
    sw->add_option("-j,--workers", workers, "Worker threads (0 = host cores)");

    auto* mg = app.add_subcommand("margins", "Crossover and phase margin per speed bin");
    mg->add_option("file", file, "Scenario file")->required();
    mg->add_option("--speed", speeds, "Only these speeds (m/s)")->delimiter(',');

    auto* bn = app.add_subcommand("bench", "Time the exp and LUT semantic checks");
    bn->add_option("--iters", iters, "Number of checks per path (>= 100000)");

    auto* pt = app.add_subcommand("paper-tables", "Detection-time and stopping-distance tables");
    pt->add_option("-o,--output", dir, "Output directory");
    pt->add_option("--scenario", preset, "Base scenario (defaults when omitted)");
    pt->add_option("-j,--workers", workers, "Worker threads (0 = host cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*run) return cmd_run(file, out);
    if (*sw) return cmd_sweep(file, axis, values, out, workers);
    if (*mg) return cmd_margins(file, speeds);
    if (*bn) return cmd_bench(iters);
    if (*pt) return cmd_tables(preset, dir, workers);
    return 1;
}
