#include "cyfence/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cyfence/error.hpp"

namespace cyf {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s) {
    double x = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end) throw Error(Errc::parse_error, "expected a number, got '" + s + "'");
    return x;
}

int to_int(const std::string& s) {
    int x = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end) throw Error(Errc::parse_error, "expected an integer, got '" + s + "'");
    return x;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw Error(Errc::parse_error, "expected true or false, got '" + s + "'");
}

std::string exact(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RecoveryPolicy to_policy(const std::string& s) {
    for (auto p : {RecoveryPolicy::none, RecoveryPolicy::switch_backup, RecoveryPolicy::safe_stop})
        if (s == to_string(p)) return p;
    throw Error(Errc::parse_error, "recovery must be none, switch_backup or safe_stop, got '" + s + "'");
}

struct Field {
    std::function<void(SimConfig&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

Field num(double SimConfig::*m) {
    return {[m](SimConfig& c, const std::string& v) { c.*m = to_double(v); },
            [m](const SimConfig& c) { return exact(c.*m); }};
}

template <class T>
Field num(T SimConfig::*outer, double T::*m) {
    return {[=](SimConfig& c, const std::string& v) { (c.*outer).*m = to_double(v); },
            [=](const SimConfig& c) { return exact((c.*outer).*m); }};
}

Field flag(bool MonitorConfig::*m) {
    return {[m](SimConfig& c, const std::string& v) { c.monitor.*m = to_bool(v); },
            [m](const SimConfig& c) { return std::string(c.monitor.*m ? "true" : "false"); }};
}

Field fric(double FrictionCurve::*m) {
    return {[m](SimConfig& c, const std::string& v) { c.plant.friction.*m = to_double(v); },
            [m](const SimConfig& c) { return exact(c.plant.friction.*m); }};
}

using Schema = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>;

const Schema& schema() {
    static const Schema s = {
        {"plant",
         {{"r", num(&SimConfig::plant, &PlantParams::r)},
          {"J", num(&SimConfig::plant, &PlantParams::J)},
          {"m_quarter", num(&SimConfig::plant, &PlantParams::m_quarter)},
          {"Fz", num(&SimConfig::plant, &PlantParams::Fz)},
          {"lambda_bar", num(&SimConfig::plant, &PlantParams::lambda_bar)},
          {"v_bar", num(&SimConfig::plant, &PlantParams::v_bar)},
          {"omega_act", num(&SimConfig::plant, &PlantParams::omega_act)},
          {"tau", num(&SimConfig::plant, &PlantParams::tau)},
          {"gain_scale", num(&SimConfig::plant, &PlantParams::gain_scale)},
          {"c1", fric(&FrictionCurve::c1)},
          {"c2", fric(&FrictionCurve::c2)},
          {"c3", fric(&FrictionCurve::c3)}}},
        {"gains",
         {{"Kp", num(&SimConfig::gains, &PidGains::Kp)},
          {"Ki", num(&SimConfig::gains, &PidGains::Ki)},
          {"Kd", num(&SimConfig::gains, &PidGains::Kd)},
          {"Tf", num(&SimConfig::gains, &PidGains::Tf)},
          {"setpoint", num(&SimConfig::gains, &PidGains::setpoint)},
          {"torque_min", num(&SimConfig::limits, &TorqueLimits::lo)},
          {"torque_max", num(&SimConfig::limits, &TorqueLimits::hi)}}},
        {"sim",
         {{"dt", num(&SimConfig::dt)},
          {"v0", num(&SimConfig::v0)},
          {"v_stop", num(&SimConfig::v_stop)},
          {"max_t", num(&SimConfig::max_t)},
          {"lambda0", num(&SimConfig::lambda0)},
          {"substeps",
           {[](SimConfig& c, const std::string& v) { c.substeps = to_int(v); },
            [](const SimConfig& c) { return std::to_string(c.substeps); }}},
          {"allow_multiple_attacks",
           {[](SimConfig& c, const std::string& v) { c.allow_multiple_attacks = to_bool(v); },
            [](const SimConfig& c) { return std::string(c.allow_multiple_attacks ? "true" : "false"); }}}}},
        {"monitor",
         {{"monitor_enabled", flag(&MonitorConfig::monitor_enabled)},
          {"lut_enabled", flag(&MonitorConfig::lut_enabled)},
          {"recovery",
           {[](SimConfig& c, const std::string& v) { c.monitor.recovery = to_policy(v); },
            [](const SimConfig& c) { return std::string(to_string(c.monitor.recovery)); }}},
          {"backup_enabled", flag(&MonitorConfig::backup_enabled)},
          {"budget", num(&SimConfig::monitor, &MonitorConfig::budget)},
          {"nominal_cost", num(&SimConfig::monitor, &MonitorConfig::nominal_cost)},
          {"min_half_width", num(&SimConfig::monitor, &MonitorConfig::min_half_width)},
          {"lut_resolution", num(&SimConfig::monitor, &MonitorConfig::lut_resolution)},
          {"lut_horizon", num(&SimConfig::monitor, &MonitorConfig::lut_horizon)},
          {"safe_stop_ramp", num(&SimConfig::monitor, &MonitorConfig::safe_stop_ramp)}}},
    };
    return s;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& [sec, fields] : schema())
        if (sec == section)
            for (const auto& [k, f] : fields)
                if (k == key) return &f;
    return nullptr;
}

void set_attack(AttackSpec& a, const std::string& key, const std::string& value) {
    if (key == "kind") {
        auto k = attack_kind_from_string(value);
        if (!k) throw Error(Errc::parse_error, "unknown attack kind '" + value + "'");
        a.kind = *k;
    } else if (key == "value") {
        a.value = to_double(value);
    } else if (key == "t_start") {
        a.t_start = to_double(value);
    } else if (key == "t_end") {
        a.t_end = to_double(value);
    } else {
        throw Error(Errc::parse_error, "unknown key '" + key + "' in [attack]");
    }
}

}  // namespace

void set_scenario_value(SimConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value) {
    if (section == "attack") {
        if (cfg.attacks.empty()) cfg.attacks.emplace_back();
        set_attack(cfg.attacks.front(), key, value);
        return;
    }
    const Field* f = find_field(section, key);
    if (!f) throw Error(Errc::parse_error, "unknown key '" + key + "' in [" + section + "]");
    f->set(cfg, value);
}

SimConfig parse_scenario(std::string_view text, const std::string& origin) {
    SimConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::set<std::string> attack_keys;
    int attack_line = 0;
    int line_no = 0;
    auto fail = [&](int line, const std::string& msg) {
        throw Error(Errc::parse_error, origin + ":" + std::to_string(line) + ": " + msg);
    };
    auto close_attack = [&] {
        if (section == "attack" && (!attack_keys.count("kind") || !attack_keys.count("value")))
            fail(attack_line, "[attack] needs both kind and value");
    };

    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string line = trim(raw.substr(0, raw.find_first_of("#;")));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            close_attack();
            section = trim(line.substr(1, line.size() - 2));
            if (section == "attack") {
                cfg.attacks.emplace_back();
                attack_keys.clear();
                attack_line = line_no;
            } else {
                bool known = false;
                for (const auto& s : schema()) known = known || s.first == section;
                if (!known) fail(line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        if (section.empty()) fail(line_no, "key outside of a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (section == "attack") {
                if (!attack_keys.insert(key).second) fail(line_no, "duplicate key '" + key + "'");
                set_attack(cfg.attacks.back(), key, value);
            } else {
                if (!seen.insert(section + "." + key).second) fail(line_no, "duplicate key '" + key + "'");
                const Field* f = find_field(section, key);
                if (!f) fail(line_no, "unknown key '" + key + "' in [" + section + "]");
                f->set(cfg, value);
            }
        } catch (const Error& e) {
            if (e.code() != Errc::parse_error || std::string(e.what()).rfind(origin + ":", 0) == 0) throw;
            fail(line_no, std::string("[") + section + "] " + key + ": " + e.what());
        }
    }
    close_attack();
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(Errc::parse_error, origin + ": " + e.what());
    }
    return cfg;
}

SimConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::not_found, "scenario not found: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

std::string serialize_scenario(const SimConfig& cfg) {
    std::ostringstream os;
    for (const auto& [sec, fields] : schema()) {
        os << '[' << sec << "]\n";
        for (const auto& [k, f] : fields) os << k << " = " << f.get(cfg) << '\n';
        os << '\n';
    }
    for (const auto& a : cfg.attacks) {
        os << "[attack]\nkind = " << to_string(a.kind) << "\nvalue = " << exact(a.value) << "\nt_start = " << exact(a.t_start)
           << '\n';
        if (a.t_end) os << "t_end = " << exact(*a.t_end) << '\n';
        os << '\n';
    }
    return os.str();
}

const char* const kCsvHeader =
    "t,v,omega,lambda,bound_lo,bound_hi,u_commanded,u_applied,active_controller,detected_kind,elapsed_budget";

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

void write_csv(std::ostream& os, const ScenarioResult& r) {
    os << kCsvHeader << '\n';
    for (const auto& row : r.rows) {
        const char* kind = row.semantic && row.deadline ? "semantic+deadline"
                           : row.semantic               ? "semantic"
                           : row.deadline               ? "deadline"
                                                        : "";
        os << format_number(row.t) << ',' << format_number(row.v) << ',' << format_number(row.omega) << ','
           << format_number(row.lambda) << ',' << format_number(row.bound_lo) << ',' << format_number(row.bound_hi)
           << ',' << format_number(row.u_commanded) << ',' << format_number(row.u_applied) << ','
           << to_string(row.active_controller) << ',' << kind << ',' << format_number(row.elapsed_budget) << '\n';
    }
}

std::string render_summary(const ScenarioResult& r) {
    std::ostringstream os;
    os << "status: " << to_string(r.status);
    if (r.status == RunStatus::aborted) os << " at row " << r.abort_row << " (" << r.abort_reason << ")";
    os << "\niterations: " << r.rows.size() << "\nfinal time: " << format_number(r.t_end) << " s"
       << "\nstop distance: " << format_number(r.stop_distance) << " m";
    if (r.status != RunStatus::complete) os << " (incomplete)";
    os << "\ndetection time: ";
    if (r.detection_time) {
        os << format_number(*r.detection_time) << " s";
        if (r.detection_time_rel) os << " (" << format_number(*r.detection_time_rel) << " s after attack start)";
    } else {
        os << "none";
    }
    os << "\ndetections: " << r.detection_events.size() << "\ndeadline misses: " << r.deadline_misses << '\n';
    for (const auto& e : r.detection_events)
        os << "  " << to_string(e.kind) << " at " << format_number(e.t) << " s, measured " << format_number(e.measured)
           << ", bound " << format_number(e.bound) << '\n';
    os << "recovery actions: " << r.recovery_actions.size() << '\n';
    for (const auto& a : r.recovery_actions)
        os << "  " << to_string(a.policy) << " at " << format_number(a.t) << " s, " << to_string(a.previous) << " -> "
           << to_string(a.next) << '\n';
    return os.str();
}

void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows) {
    os << "axis,value,detection_time_s,stop_distance_m,status,error\n";
    for (const auto& r : rows) {
        os << to_string(axis) << ',' << format_number(r.value) << ','
           << (r.detection_time ? format_number(*r.detection_time) : std::string()) << ','
           << (r.error.empty() ? format_number(r.stop_distance) : std::string()) << ',' << to_string(r.status) << ','
           << r.error << '\n';
    }
}

std::string render_sweep_table(SweepAxis axis, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %-14s %-20s %s\n", "Attacked", "Value", "Detection time (s)", "Stop distance (m)");
    os << buf;
    for (const auto& r : rows) {
        const std::string det = r.detection_time ? format_number(*r.detection_time) : "not detected";
        const std::string dist = r.error.empty() ? format_number(r.stop_distance) : "failed: " + r.error;
        std::snprintf(buf, sizeof buf, "%-10s %-14s %-20s %s\n", to_string(axis), format_number(r.value).c_str(),
                      det.c_str(), dist.c_str());
        os << buf;
    }
    return os.str();
}

MarginsReport margins_report(const SimConfig& cfg, const std::vector<double>& speeds) {
    MarginsReport rep;
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%8s %14s %12s %8s %14s\n", "v (m/s)", "w_c (rad/s)", "phi_m (deg)", "xi",
                  "w_n*xi (1/s)");
    os << buf;
    for (double v : speeds) {
        PlantParams p = cfg.plant;
        p.v_bar = v;
        try {
            const auto m = loop_margins(loop_tf(p, cfg.gains));
            const double xi = xi_from_margin(m.phi_m);
            std::snprintf(buf, sizeof buf, "%8.1f %14.6g %12.6g %8.4f %14.6g%s\n", v, m.omega_c, m.phi_m, xi,
                          m.omega_c * xi, m.phi_m > 0.0 ? "" : "  WARNING: phi_m <= 0");
            if (!(m.phi_m > 0.0)) ++rep.warnings;
        } catch (const Error& e) {
            std::snprintf(buf, sizeof buf, "%8.1f  %s\n", v, e.what());
            ++rep.warnings;
        }
        os << buf;
    }
    if (rep.warnings) os << rep.warnings << " bin(s) without a positive phase margin\n";
    rep.text = os.str();
    return rep;
}

BenchReport bench_monitor(std::uint64_t iterations) {
    if (iterations < kBenchMinIterations)
        throw Error(Errc::invalid_argument, "bench needs at least " + std::to_string(kBenchMinIterations) + " iterations");
    SimConfig cfg;
    MonitorConfig mc = cfg.monitor;
    const CdalStore store = CdalStore::create(cfg.plant, cfg.gains, mc);
    mc.lut_enabled = false;
    Validator analytic(store, mc);
    mc.lut_enabled = true;
    Validator lut(store, mc);

    // Pre-drawn inputs so both paths see the same workload. Time and speed
    // follow a braking run, as the monitor sees them in the loop.
    constexpr std::size_t kBatch = 64;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dl(0.0, 0.3);
    std::vector<double> vs(4096), ts(4096), ls(4096);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        ts[i] = cfg.dt * static_cast<double>(i % 800);
        vs[i] = cfg.v0 - (cfg.v0 - cfg.v_stop) * ts[i] / 4.0;
        ls[i] = dl(rng);
    }

    using clock = std::chrono::steady_clock;
    const std::uint64_t batches = (iterations + kBatch - 1) / kBatch;
    std::vector<double> a_us, l_us;
    a_us.reserve(batches);
    l_us.reserve(batches);
    volatile int sink = 0;
    std::size_t idx = 0;
    auto run = [&](Validator& val) {
        int hits = 0;
        const auto t0 = clock::now();
        for (std::size_t j = 0; j < kBatch; ++j) {
            const std::size_t i = (idx + j) & 4095;
            hits += val.bounds(vs[i], ts[i]).contains(ls[i]);
        }
        const auto t1 = clock::now();
        sink = sink + hits;
        return std::chrono::duration<double, std::micro>(t1 - t0).count() / kBatch;
    };
    for (std::uint64_t b = 0; b < batches; ++b) {
        // Alternate the order so drift hits both paths equally.
        if (b % 2) {
            a_us.push_back(run(analytic));
            l_us.push_back(run(lut));
        } else {
            l_us.push_back(run(lut));
            a_us.push_back(run(analytic));
        }
        idx += kBatch;
    }
    auto stats = [](std::vector<double>& x) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        std::sort(x.begin(), x.end());
        const auto k = static_cast<std::size_t>(0.99 * static_cast<double>(x.size() - 1));
        return std::pair{mean, x[k]};
    };
    const auto [am, ap] = stats(a_us);
    const auto [lm, lp] = stats(l_us);
    return {batches * kBatch, am, ap, lm, lp};
}

std::string render_bench(const BenchReport& r) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %12s %12s\n", "path", "mean (us)", "p99 (us)");
    os << "iterations: " << r.iterations << '\n' << buf;
    std::snprintf(buf, sizeof buf, "%-22s %12.4f %12.4f\n", "semantic check (exp)", r.analytic_mean_us, r.analytic_p99_us);
    os << buf;
    std::snprintf(buf, sizeof buf, "%-22s %12.4f %12.4f\n", "semantic check (LUT)", r.lut_mean_us, r.lut_p99_us);
    os << buf;
    const bool ok = r.lut_mean_us < r.analytic_mean_us && r.analytic_mean_us < 5000.0 && r.lut_mean_us < 5000.0;
    os << "LUT faster than exp and both within the 5 ms deadline: " << (ok ? "yes" : "NO") << '\n';
    return os.str();
}

std::vector<TableBlock> table_blocks() {
    return {
        {SweepAxis::Kp, {18000, 18500, 19000, 19500, 20000}},
        {SweepAxis::Ki, {750000, 800000, 850000, 900000, 950000}},
        {SweepAxis::Kd, {1600, 1650, 1700, 1750, 1800}},
        {SweepAxis::setpoint, {0.1, 0.3, 0.5, 0.7, 0.9}},
        {SweepAxis::output, {-0.6, -0.2, 0.2, 0.6, 1.0}},
    };
}

std::string write_tables(const SimConfig& base, const std::filesystem::path& dir, unsigned workers) {
    std::filesystem::create_directories(dir);
    std::ostringstream text;

    std::ofstream det_csv(dir / "detection_times.csv");
    if (!det_csv) throw Error(Errc::io_error, "cannot write " + (dir / "detection_times.csv").string());
    det_csv << "axis,value,detection_time_s,stop_distance_m,status,error\n";
    text << "Detection times\n";
    for (const auto& block : table_blocks()) {
        const auto rows = sweep(base, block.axis, block.values, workers);
        std::ostringstream tmp;
        write_sweep_csv(tmp, block.axis, rows);
        const std::string body = tmp.str();
        det_csv << body.substr(body.find('\n') + 1);
        text << render_sweep_table(block.axis, rows);
    }

    SimConfig nominal = base;
    nominal.attacks.clear();
    SimConfig unsecured = base;
    unsecured.monitor.monitor_enabled = false;
    SimConfig secured = base;
    secured.monitor.monitor_enabled = true;
    if (secured.monitor.recovery == RecoveryPolicy::none) secured.monitor.recovery = RecoveryPolicy::switch_backup;
    const std::vector<double> sps{0.1, 0.5, 0.9};
    const auto off = sweep(unsecured, SweepAxis::setpoint, sps, workers);
    const auto on = sweep(secured, SweepAxis::setpoint, sps, workers);
    const auto nom = run_braking(nominal);

    std::ofstream sd_csv(dir / "stopping_distances.csv");
    if (!sd_csv) throw Error(Errc::io_error, "cannot write " + (dir / "stopping_distances.csv").string());
    sd_csv << "setpoint,unsecured_m,secured_m,unsecured_increase_m,secured_increase_m\n";
    sd_csv << "nominal," << format_number(nom.stop_distance) << ',' << format_number(nom.stop_distance) << ",0,0\n";
    text << "\nStopping distances\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %-22s %s\n", "Setpoint", "Unsecured (m)", "Secured (m)");
    text << buf;
    std::snprintf(buf, sizeof buf, "%-10s %-22s %s\n", "nominal", format_number(nom.stop_distance).c_str(),
                  format_number(nom.stop_distance).c_str());
    text << buf;
    for (std::size_t i = 0; i < sps.size(); ++i) {
        const double du = off[i].stop_distance - nom.stop_distance;
        const double ds = on[i].stop_distance - nom.stop_distance;
        sd_csv << format_number(sps[i]) << ',' << format_number(off[i].stop_distance) << ','
               << format_number(on[i].stop_distance) << ',' << format_number(du) << ',' << format_number(ds) << '\n';
        std::snprintf(buf, sizeof buf, "%-10s +%-21s +%s\n", format_number(sps[i]).c_str(), format_number(du).c_str(),
                      format_number(ds).c_str());
        text << buf;
    }
    std::ofstream(dir / "detection_times.txt") << text.str().substr(0, text.str().find("\nStopping distances"));
    std::ofstream(dir / "stopping_distances.txt") << text.str().substr(text.str().find("Stopping distances"));
    return text.str();
}

}  // namespace cyf
