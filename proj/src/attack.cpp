#include "cyfence/attack.hpp"

#include <cmath>

#include "cyfence/error.hpp"

namespace cyf {

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::param_kp: return "param_kp";
        case AttackKind::param_ki: return "param_ki";
        case AttackKind::param_kd: return "param_kd";
        case AttackKind::setpoint: return "setpoint";
        case AttackKind::output_override: return "output_override";
        case AttackKind::deadline_delay: return "deadline_delay";
    }
    return "?";
}

std::optional<AttackKind> attack_kind_from_string(const std::string& s) {
    for (auto k : {AttackKind::param_kp, AttackKind::param_ki, AttackKind::param_kd, AttackKind::setpoint,
                   AttackKind::output_override, AttackKind::deadline_delay})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

void AttackSpec::validate() const {
    if (!std::isfinite(value)) throw Error(Errc::invalid_argument, "attack value must be finite");
    if (!(t_start >= 0.0)) throw Error(Errc::invalid_argument, "attack t_start must be >= 0 s");
    if (t_end && !(*t_end > t_start)) throw Error(Errc::invalid_argument, "attack t_end must be > t_start");
    if (kind == AttackKind::deadline_delay && value < 0.0)
        throw Error(Errc::invalid_argument, "deadline_delay value is a delay in s and must be >= 0");
    if (kind == AttackKind::setpoint && !(value > 0.0 && value < 1.0))
        throw Error(Errc::invalid_argument, "setpoint attack value must lie in (0, 1)");
}

bool AttackSpec::active_at(std::int64_t k, double dt) const {
    // Round the edges onto the sample grid so that 0.1 / 0.005 lands on 20.
    const auto first = static_cast<std::int64_t>(std::ceil(t_start / dt - 1e-9));
    if (k < first) return false;
    if (t_end) {
        const auto stop = static_cast<std::int64_t>(std::ceil(*t_end / dt - 1e-9));
        if (k >= stop) return false;
    }
    return true;
}

LoopView apply(const AttackSpec& spec, LoopView view, std::int64_t k, double dt) {
    if (!spec.active_at(k, dt)) return view;
    switch (spec.kind) {
        case AttackKind::param_kp: view.gains.Kp = spec.value; break;
        case AttackKind::param_ki: view.gains.Ki = spec.value; break;
        case AttackKind::param_kd: view.gains.Kd = spec.value; break;
        case AttackKind::setpoint: view.gains.setpoint = spec.value; break;
        case AttackKind::output_override: view.forced_output = spec.value; break;
        case AttackKind::deadline_delay: view.extra_delay += spec.value; break;
    }
    return view;
}

LoopView apply(std::span<const AttackSpec> specs, LoopView view, std::int64_t k, double dt) {
    for (const auto& s : specs) view = apply(s, view, k, dt);
    return view;
}

}  // namespace cyf
