#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hifd/wavegen.hpp"

namespace hifd {

// CSV with header t,va,vb,vc,ia,ib,ic.
std::string record_to_csv(const WaveformRecord& rec);
WaveformRecord record_from_csv(const std::string& text);
void write_record_csv(const std::filesystem::path& path, const WaveformRecord& rec);
WaveformRecord read_record_csv(const std::filesystem::path& path);

nlohmann::ordered_json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::ordered_json& j);

}  // namespace hifd
