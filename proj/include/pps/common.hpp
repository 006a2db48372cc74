// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pps {

// Base class for everything this library throws on bad input or
// unrecoverable numerical trouble.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched ambient dimensions (e.g. adding a 2-var and a 3-var polynomial).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Syntax errors from the textual front ends; carries a 1-based location.
class ParseError : public Error {
public:
    ParseError(std::string msg, int line, int col)
        : Error(std::move(msg)), line(line), col(col) {}
    int line = 0;
    int col = 0;
};

// Diagnostics controlled by the PPS_LOG environment variable
// (unset/"quiet", "info", "debug").
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

// Shortest decimal string that parses back to exactly `v` (plain %g beyond
// that). Keeps human-facing output readable without losing precision.
std::string format_double(double v);

inline void log_info(const std::string& msg) { log_line(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_line(LogLevel::Debug, msg); }

} // namespace pps
