// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace pps {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("PPS_LOG");
        if (!env) return LogLevel::Quiet;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        if (std::strcmp(env, "quiet") == 0 || std::strcmp(env, "0") == 0)
            return LogLevel::Quiet;
        return LogLevel::Info; // any other non-empty value
    }();
    return level;
}

void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    std::fprintf(stderr, "[pps] %s\n", msg.c_str());
}

std::string format_double(double v) {
    char buf[64];
    for (int precision = 1; precision <= 16; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace pps
