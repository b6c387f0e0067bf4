#include "hifd/waveform_io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "hifd/io_util.hpp"

namespace hifd {

std::string record_to_csv(const WaveformRecord& rec) {
  std::string out = "t,va,vb,vc,ia,ib,ic\n";
  out.reserve(rec.size() * 120);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    out += format_double(rec.t[k]);
    for (const auto& ch : rec.channels) {
      out += ',';
      out += format_double(ch[k]);
    }
    out += '\n';
  }
  return out;
}

WaveformRecord record_from_csv(const std::string& text) {
  WaveformRecord rec;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw std::runtime_error("csv: missing header");
  std::string header = text.substr(0, pos);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "t,va,vb,vc,ia,ib,ic") throw std::runtime_error("csv: unexpected header '" + header + "'");
  ++pos;
  std::size_t line = 1;
  while (pos < text.size()) {
    ++line;
    double vals[7];
    const char* p = text.data() + pos;
    const char* end = text.data() + text.size();
    if (*p == '\n' || *p == '\r') {
      pos = text.find('\n', pos);
      pos = pos == std::string::npos ? text.size() : pos + 1;
      continue;
    }
    for (int c = 0; c < 7; ++c) {
      auto r = std::from_chars(p, end, vals[c]);
      if (r.ec != std::errc()) throw std::runtime_error("csv: bad number on line " + std::to_string(line));
      p = r.ptr;
      if (c < 6) {
        if (p >= end || *p != ',') throw std::runtime_error("csv: expected 7 columns on line " + std::to_string(line));
        ++p;
      }
    }
    while (p < end && (*p == '\r' || *p == ' ')) ++p;
    if (p < end && *p != '\n') throw std::runtime_error("csv: trailing data on line " + std::to_string(line));
    pos = std::size_t(p - text.data()) + 1;
    rec.t.push_back(vals[0]);
    for (int c = 0; c < 6; ++c) rec.channels[c].push_back(vals[c + 1]);
  }
  if (rec.t.size() >= 2) rec.sample_rate = 1.0 / (rec.t[1] - rec.t[0]);
  if (rec.t.size() >= 2) rec.sample_rate = std::round(rec.sample_rate * 1e6) / 1e6;
  return rec;
}

void write_record_csv(const std::filesystem::path& path, const WaveformRecord& rec) {
  atomic_write(path, record_to_csv(rec));
}

WaveformRecord read_record_csv(const std::filesystem::path& path) { return record_from_csv(read_file(path)); }

nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(sc.kind);
  if (sc.surface) {
    const auto& s = *sc.surface;
    nlohmann::ordered_json js;
    js["name"] = s.name;
    js["r1_ohms"] = s.r1_ohms;
    js["r1_rel_tol"] = s.r1_rel_tol;
    js["r2_ohms"] = s.r2_ohms;
    js["r2_rel_tol"] = s.r2_rel_tol;
    js["v1_volts"] = s.v1_volts;
    js["v1_tol"] = s.v1_tol;
    js["v2_volts"] = s.v2_volts;
    js["v2_tol"] = s.v2_tol;
    js["rerandomize_interval"] = s.rerandomize_interval;
    j["surface"] = js;
  } else {
    j["surface"] = nullptr;
  }
  j["fault_node"] = sc.fault_node;
  j["fault_phase"] = to_string(sc.fault_phase);
  j["inception_time"] = sc.inception_time;
  j["duration"] = sc.duration;
  if (sc.snr_db && std::isfinite(*sc.snr_db))
    j["snr_db"] = *sc.snr_db;
  else
    j["snr_db"] = nullptr;
  j["rng_seed"] = sc.rng_seed;
  return j;
}

Scenario scenario_from_json(const nlohmann::ordered_json& j) {
  Scenario sc;
  sc.kind = kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("surface") && !j.at("surface").is_null()) {
    const auto& js = j.at("surface");
    HifSurfaceParams s;
    s.name = js.at("name").get<std::string>();
    s.r1_ohms = js.at("r1_ohms").get<double>();
    s.r1_rel_tol = js.at("r1_rel_tol").get<double>();
    s.r2_ohms = js.at("r2_ohms").get<double>();
    s.r2_rel_tol = js.at("r2_rel_tol").get<double>();
    s.v1_volts = js.at("v1_volts").get<double>();
    s.v1_tol = js.at("v1_tol").get<double>();
    s.v2_volts = js.at("v2_volts").get<double>();
    s.v2_tol = js.at("v2_tol").get<double>();
    s.rerandomize_interval = js.value("rerandomize_interval", 0.0);
    sc.surface = s;
  }
  sc.fault_node = j.at("fault_node").get<std::string>();
  sc.fault_phase = phase_from_string(j.at("fault_phase").get<std::string>());
  sc.inception_time = j.at("inception_time").get<double>();
  sc.duration = j.at("duration").get<double>();
  if (j.contains("snr_db") && !j.at("snr_db").is_null()) sc.snr_db = j.at("snr_db").get<double>();
  sc.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  sc.validate();
  return sc;
}

}  // namespace hifd
