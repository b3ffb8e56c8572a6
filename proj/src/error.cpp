#include "cyfence/error.hpp"

#include <iostream>
#include <mutex>

namespace cyf {

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink;
}  // namespace

void set_warning_sink(WarningSink sink) {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    g_sink = std::move(sink);
}

void warn(std::string_view msg) {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    if (g_sink)
        g_sink(msg);
    else
        std::cerr << "warning: " << msg << '\n';
}

}  // namespace cyf
