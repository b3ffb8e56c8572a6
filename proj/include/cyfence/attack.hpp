#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cyfence/controller.hpp"

namespace cyf {

enum class AttackKind { param_kp, param_ki, param_kd, setpoint, output_override, deadline_delay };

const char* to_string(AttackKind k);
std::optional<AttackKind> attack_kind_from_string(const std::string& s);

struct AttackSpec {
    AttackKind kind = AttackKind::setpoint;
    double value = 0.0;  // gain, slip, output fraction of torque_max, or delay in s
    double t_start = 0.0;  // s
    std::optional<double> t_end;

    void validate() const;
    // Active on iteration k when t_start <= k dt < t_end, on the iteration grid.
    bool active_at(std::int64_t k, double dt) const;
};

// Non-secure loop state an attacker can reach: the controller's working
// gains, its output wire and its execution time model.
struct LoopView {
    PidGains gains;
    std::optional<double> forced_output;  // fraction of torque_max
    double extra_delay = 0.0;             // s
};

LoopView apply(const AttackSpec& spec, LoopView view, std::int64_t k, double dt);
LoopView apply(std::span<const AttackSpec> specs, LoopView view, std::int64_t k, double dt);

}  // namespace cyf
