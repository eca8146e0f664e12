#pragma once

#include <string>

#include "json.hpp"

#include "dpminimax/bounds.hpp"
#include "dpminimax/codes.hpp"
#include "dpminimax/core.hpp"
#include "dpminimax/mechanisms.hpp"
#include "dpminimax/packings.hpp"

namespace dpminimax {

using Json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors name the source and the line/column.
Json parse_json(const std::string& text, const std::string& source);
std::string read_text_file(const std::string& path);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// 1-based line of the first occurrence of "key" in text, or 0.
std::size_t line_of_key(const std::string& text, const std::string& key);

Json to_json(const Distribution& dist);
Distribution distribution_from_json(const Json& j);

Json to_json(const Code& code);
Code code_from_json(const Json& j);

Json to_json(const VerificationReport& report);
Json to_json(const HypercubeReport& report);
Json to_json(const PackingFamily& family);
PackingFamily family_from_json(const Json& j);
Json to_json(const HypercubeFamily& family);
HypercubeFamily hypercube_from_json(const Json& j);

Json to_json(const BoundReport& report);
Json to_json(const std::vector<TableRow>& rows);

Json to_json(const FiniteMechanism& mech);
FiniteMechanism mechanism_from_json(const Json& j);

/// Accepts a bare array of symbols or {"symbols": [...]}.
SymbolData symbols_from_json(const Json& j);

std::string to_string(Loss loss);
Loss parse_loss(const std::string& name);

}  // namespace dpminimax
