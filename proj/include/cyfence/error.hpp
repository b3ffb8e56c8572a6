#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cyf {

enum class Errc {
    invalid_argument = 1,
    evaluation_at_pole,
    no_crossover,
    abs_inactive,
    hard_fault,
    parse_error,
    not_found,
    io_error,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Warnings go to stderr unless a sink is installed. The sink is process wide.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view msg);

}  // namespace cyf
