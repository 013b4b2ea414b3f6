#pragma once

#include <string>

#include <json.hpp>

#include "paraprod/grid.hpp"

namespace pp {

using json = nlohmann::json;

json signal_to_json(const Signal& s);
Signal signal_from_json(const json& j);
json set_to_json(const MeasurableSet& F);
MeasurableSet set_from_json(const json& j);

// columns x,re,im
std::string signal_to_csv(const Signal& s);

// Fixed-precision number formatting shared by every CSV writer.
std::string fmt_num(double v);

// lowercase hex SHA-256 of a byte string
std::string sha256_hex(const std::string& bytes);

}  // namespace pp
