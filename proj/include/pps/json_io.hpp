// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "pps/analysis.hpp"
#include "pps/semialg.hpp"

namespace pps::io {

using nlohmann::json;

// Extended reals: +-infinity serialize as the strings "inf" / "-inf".
json number_to_json(double v);
double number_from_json(const json& j);

json system_to_json(const semialg::PpsSystem& sys);
semialg::PpsSystem system_from_json(const json& j);

json bounds_to_json(const analysis::TemplateBasis& basis,
                    const analysis::BoundVector& w,
                    const std::vector<std::string>& variables);
// Returns the basis and bounds; variables must be stored in the file.
std::pair<analysis::TemplateBasis, analysis::BoundVector>
bounds_from_json(const json& j);

json trace_to_json(const analysis::IterationTrace& trace,
                   const analysis::TemplateBasis& basis,
                   const std::vector<std::string>& variables, int degree,
                   bool include_times);

void write_text_file(const std::string& path, const std::string& content);

} // namespace pps::io
