#include "hifd/wavegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace hifd {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPhaseAngle[3] = {0.0, -2.0 * kPi / 3.0, 2.0 * kPi / 3.0};

enum Stream : std::uint64_t { kStreamPhase = 1, kStreamHif = 2, kStreamNoise = 3, kStreamDisturbance = 4 };

std::size_t sample_count(const FeederConfig& cfg, double duration) {
  return std::size_t(std::llround(duration * cfg.sample_rate));
}

// First sample index at or after time t.
std::size_t index_at(const FeederConfig& cfg, double t) {
  return std::size_t(std::max(0.0, std::ceil(t * cfg.sample_rate - 1e-9)));
}

double initial_angle(std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, kStreamPhase));
  return std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::A: return "A";
    case Phase::B: return "B";
    case Phase::C: return "C";
  }
  return "?";
}

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::steady: return "steady";
    case ScenarioKind::hif: return "hif";
    case ScenarioKind::capacitor_switching: return "capacitor_switching";
    case ScenarioKind::nonlinear_load: return "nonlinear_load";
    case ScenarioKind::inrush: return "inrush";
    case ScenarioKind::intermittent_hif: return "intermittent_hif";
  }
  return "?";
}

std::string to_string(Label l) { return l == Label::fault ? "fault" : "non-fault"; }

Phase phase_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Phase::A;
  if (s == "B" || s == "b") return Phase::B;
  if (s == "C" || s == "c") return Phase::C;
  throw std::invalid_argument("unknown phase '" + s + "'");
}

ScenarioKind kind_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::steady, ScenarioKind::hif, ScenarioKind::capacitor_switching,
                 ScenarioKind::nonlinear_load, ScenarioKind::inrush, ScenarioKind::intermittent_hif})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

bool is_fault_kind(ScenarioKind k) { return k == ScenarioKind::hif || k == ScenarioKind::intermittent_hif; }
Label label_for(ScenarioKind k) { return is_fault_kind(k) ? Label::fault : Label::non_fault; }

// ---- feeder

double FeederConfig::phase_voltage() const { return nominal_line_voltage / std::sqrt(3.0); }

void FeederConfig::validate() const {
  if (!(system_frequency > 0.0)) throw std::invalid_argument("feeder: system frequency must be positive");
  if (!(nominal_line_voltage > 0.0)) throw std::invalid_argument("feeder: nominal voltage must be positive");
  if (sample_rate < 100.0 * system_frequency)
    throw std::invalid_argument("feeder: sample rate must be at least 100x the system frequency");
  std::set<std::string> nodes{source_node};
  for (const auto& l : lines) {
    if (l.length_ft < 0.0) throw std::invalid_argument("feeder: negative line length");
    nodes.insert(l.node_a);
    nodes.insert(l.node_b);
  }
  for (const auto& ld : loads) {
    for (const auto& p : ld.phase)
      if (p.kw < 0.0 || p.kvar < 0.0) throw std::invalid_argument("feeder: negative load at node " + ld.node);
    if (!nodes.count(ld.node)) throw std::invalid_argument("feeder: load node " + ld.node + " is not on any line");
  }
  const auto paths = path_lengths();
  for (const auto& n : nodes)
    if (!paths.count(n)) throw std::invalid_argument("feeder: node " + n + " is not connected to the source");
}

std::map<std::string, double> FeederConfig::path_lengths() const {
  std::map<std::string, double> dist{{source_node, 0.0}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& l : lines) {
      auto a = dist.find(l.node_a);
      auto b = dist.find(l.node_b);
      if (a != dist.end() && b == dist.end()) {
        dist[l.node_b] = a->second + l.length_ft;
        changed = true;
      } else if (b != dist.end() && a == dist.end()) {
        dist[l.node_a] = b->second + l.length_ft;
        changed = true;
      }
    }
  }
  return dist;
}

PhaseLoad FeederConfig::total_load(Phase p) const {
  PhaseLoad s;
  for (const auto& ld : loads) {
    s.kw += ld.phase[int(p)].kw;
    s.kvar += ld.phase[int(p)].kvar;
  }
  return s;
}

FeederConfig ieee13_config() {
  FeederConfig c;
  c.loads = {
      {"634", {{160, 110}, {120, 90}, {120, 90}}}, {"645", {{0, 0}, {170, 125}, {0, 0}}},
      {"646", {{0, 0}, {230, 132}, {0, 0}}},       {"652", {{128, 86}, {0, 0}, {0, 0}}},
      {"671", {{385, 220}, {385, 220}, {385, 220}}}, {"675", {{485, 190}, {68, 60}, {290, 212}}},
      {"692", {{0, 0}, {0, 0}, {170, 151}}},       {"611", {{0, 0}, {0, 0}, {170, 80}}},
  };
  c.lines = {
      {"632", "645", 500, "CBN"},  {"632", "633", 500, "CABN"}, {"633", "634", 0, "XFM"},
      {"645", "646", 300, "CBN"},  {"650", "632", 2000, "BACN"}, {"684", "652", 800, "AN"},
      {"632", "671", 2000, "BACN"}, {"671", "684", 300, "ACN"},  {"671", "680", 1000, "BACN"},
      {"671", "692", 0, "Switch"}, {"684", "611", 300, "CN"},    {"692", "675", 500, "ABCN"},
  };
  return c;
}

// ---- surfaces

void HifSurfaceParams::validate() const {
  if (!(r1_ohms > 0 && r2_ohms > 0 && v1_volts > 0 && v2_volts > 0))
    throw std::invalid_argument("surface " + name + ": central values must be positive");
  if (r1_rel_tol < 0 || r1_rel_tol >= 1 || r2_rel_tol < 0 || r2_rel_tol >= 1 || v1_tol < 0 || v2_tol < 0 ||
      v1_tol >= v1_volts || v2_tol >= v2_volts)
    throw std::invalid_argument("surface " + name + ": tolerance out of range");
}

const std::vector<HifSurfaceParams>& surface_table() {
  static const std::vector<HifSurfaceParams> table = {
      {"wet_sand", 138, 0.10, 138, 0.10, 900, 150, 750, 150, 0.0},
      {"tree_branch", 125, 0.20, 125, 0.20, 1000, 100, 500, 50, 0.0},
      {"dry_sod", 98, 0.10, 98, 0.10, 1175, 175, 1000, 175, 0.0},
      {"dry_grass", 70, 0.10, 70, 0.10, 1400, 200, 1200, 200, 0.0},
      {"wet_sod", 43, 0.10, 43, 0.10, 1550, 250, 1300, 250, 0.0},
      {"wet_grass", 33, 0.10, 33, 0.10, 1750, 350, 1400, 350, 0.0},
      {"concrete", 23, 0.10, 23, 0.10, 2000, 500, 1500, 500, 0.0},
  };
  return table;
}

const HifSurfaceParams& surface_by_name(const std::string& name) {
  for (const auto& s : surface_table())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown surface '" + name + "'");
}

void Scenario::validate() const {
  if (is_fault_kind(kind) != surface.has_value())
    throw std::invalid_argument("scenario: surface must be present exactly for hif kinds");
  if (surface) surface->validate();
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(inception_time >= 0.0 && inception_time < duration))
    throw std::invalid_argument("scenario: inception time must lie inside the record");
  if (snr_db && std::isnan(*snr_db)) throw std::invalid_argument("scenario: snr_db is NaN");
}

bool WaveformRecord::operator==(const WaveformRecord& o) const {
  if (sample_rate != o.sample_rate || t != o.t || label != o.label) return false;
  for (int c = 0; c < 6; ++c)
    if (channels[c] != o.channels[c]) return false;
  return true;
}

// ---- models

double hif_current(double v, const HifSample& p) {
  if (v > p.v1) return (v - p.v1) / p.r1;
  if (v < -p.v2) return (v + p.v2) / p.r2;
  return 0.0;
}

SteadyPhasors steady_phasors(const FeederConfig& cfg) {
  SteadyPhasors ph;
  const std::complex<double> zs(cfg.model.source_resistance, cfg.model.source_reactance);
  for (int p = 0; p < 3; ++p) {
    const PhaseLoad ld = cfg.total_load(Phase(p));
    const std::complex<double> s(ld.kw * 1e3, ld.kvar * 1e3);
    const std::complex<double> e = std::polar(cfg.phase_voltage(), kPhaseAngle[p]);
    ph.i[p] = std::conj(s / e);
    ph.v[p] = e - zs * ph.i[p];
  }
  return ph;
}

double attenuation(const FeederConfig& cfg, const std::string& node) {
  const auto paths = cfg.path_lengths();
  auto it = paths.find(node);
  if (it == paths.end() || node == cfg.source_node)
    throw std::invalid_argument("unknown fault node '" + node + "'");
  double longest = 0.0;
  for (const auto& [n, d] : paths) longest = std::max(longest, d);
  if (longest <= 0.0) return 1.0;
  return 1.0 - (1.0 - cfg.model.remote_attenuation) * it->second / longest;
}

WaveformRecord generate_steady(const FeederConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  if (duration < 2.0 / cfg.system_frequency)
    throw std::invalid_argument("generate_steady: duration shorter than two fundamental cycles");
  const std::size_t n = sample_count(cfg, duration);
  const SteadyPhasors ph = steady_phasors(cfg);
  const double w = 2.0 * kPi * cfg.system_frequency;
  const double phi0 = initial_angle(seed);
  const double h5 = cfg.model.fifth_harmonic;

  WaveformRecord rec;
  rec.sample_rate = cfg.sample_rate;
  rec.t.resize(n);
  for (auto& c : rec.channels) c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = double(k) / cfg.sample_rate;
    rec.t[k] = t;
    for (int p = 0; p < 3; ++p) {
      const double av = w * t + phi0 + std::arg(ph.v[p]);
      const double ai = w * t + phi0 + std::arg(ph.i[p]);
      rec.channels[p][k] = std::sqrt(2.0) * std::abs(ph.v[p]) * std::sin(av);
      rec.channels[3 + p][k] = std::sqrt(2.0) * std::abs(ph.i[p]) * (std::sin(ai) + h5 * std::sin(5.0 * ai));
    }
  }
  rec.label = Label::non_fault;
  rec.scenario.kind = ScenarioKind::steady;
  rec.scenario.duration = duration;
  rec.scenario.inception_time = 0.0;
  rec.scenario.rng_seed = seed;
  return rec;
}

HifInjection hif_injection(const FeederConfig& cfg, const Scenario& sc, const std::vector<double>& v) {
  if (!sc.surface) throw std::invalid_argument("hif: scenario has no surface");
  const HifSurfaceParams& s = *sc.surface;
  const SignalModel& m = cfg.model;
  std::mt19937_64 rng(mix_seed(sc.rng_seed, kStreamHif));
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const int tones = std::max(1, m.arc_tones);
  HifSample p;
  std::vector<double> freq(tones), phase(tones), amp(tones);
  auto draw = [&] {
    p.r1 = s.r1_ohms * (1.0 + uni(-s.r1_rel_tol, s.r1_rel_tol));
    p.r2 = s.r2_ohms * (1.0 + uni(-s.r2_rel_tol, s.r2_rel_tol));
    p.v1 = s.v1_volts + uni(-s.v1_tol, s.v1_tol);
    p.v2 = s.v2_volts + uni(-s.v2_tol, s.v2_tol);
    for (int j = 0; j < tones; ++j) freq[j] = uni(m.arc_band_low, m.arc_band_high);
    for (int j = 0; j < tones; ++j) phase[j] = uni(0.0, 2.0 * kPi);
    for (int j = 0; j < tones; ++j) amp[j] = uni(0.5, 1.0);
  };
  draw();

  const double interval =
      s.rerandomize_interval > 0.0 ? s.rerandomize_interval : 0.5 / cfg.system_frequency;
  const double vpk = std::sqrt(2.0) * cfg.phase_voltage();
  double stop = std::numeric_limits<double>::infinity();
  if (sc.kind == ScenarioKind::intermittent_hif)
    stop = sc.inception_time + m.intermittent_on_cycles / cfg.system_frequency;

  HifInjection out;
  out.fault_current.assign(v.size(), 0.0);
  out.arc.assign(v.size(), 0.0);
  const double hold = m.arc_decay > 0.0 ? std::exp(-1.0 / (m.arc_decay * cfg.sample_rate)) : 0.0;
  double held = 0.0;
  double next = sc.inception_time;
  bool armed = false;
  double prev = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double t = double(k) / cfg.sample_rate;
    const double vv = v[k];
    if (t < sc.inception_time || t >= stop) {
      prev = vv;
      continue;
    }
    // conduction starts cleanly from inside the dead band
    if (!armed) {
      if (vv >= -p.v2 && vv <= p.v1) {
        armed = true;
      } else {
        prev = vv;
        continue;
      }
    }
    if (t >= next && ((vv >= 0.0) != (prev >= 0.0))) {
      draw();
      next += interval;
    }
    prev = vv;
    const double c = hif_current(vv, p);
    out.fault_current[k] = c;
    held *= hold;
    if (c != 0.0) {
      const double ipk = vv > 0.0 ? (vpk - p.v1) / p.r1 : (vpk - p.v2) / p.r2;
      const double env = std::min(1.0, std::abs(c) / (0.25 * std::abs(ipk)));
      held = std::max(held, std::abs(ipk) * env);
    }
    if (held > 0.0) {
      double tone = 0.0, norm = 0.0;
      for (int j = 0; j < tones; ++j) {
        tone += amp[j] * std::sin(2.0 * kPi * freq[j] * t + phase[j]);
        norm += amp[j];
      }
      out.arc[k] = held * tone / norm;
    }
  }
  return out;
}

WaveformRecord generate_hif(const FeederConfig& cfg, const Scenario& sc) {
  if (!is_fault_kind(sc.kind)) throw std::invalid_argument("generate_hif: scenario kind is not a fault");
  sc.validate();
  const double a = attenuation(cfg, sc.fault_node);
  WaveformRecord rec = generate_steady(cfg, sc.duration, sc.rng_seed);
  const int ph = int(sc.fault_phase);
  const HifInjection inj = hif_injection(cfg, sc, rec.channels[ph]);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    if (inj.fault_current[k] == 0.0 && inj.arc[k] == 0.0) continue;
    rec.channels[3 + ph][k] += a * (inj.fault_current[k] + cfg.model.arc_current_share * inj.arc[k]);
    rec.channels[ph][k] -= a * cfg.model.arc_voltage_gain * inj.arc[k];
  }
  rec.label = Label::fault;
  rec.scenario = sc;
  return rec;
}

WaveformRecord generate_disturbance(const FeederConfig& cfg, const Scenario& sc) {
  if (sc.kind != ScenarioKind::capacitor_switching && sc.kind != ScenarioKind::nonlinear_load &&
      sc.kind != ScenarioKind::inrush)
    throw std::invalid_argument("generate_disturbance: scenario kind is not a disturbance");
  sc.validate();
  attenuation(cfg, sc.fault_node);  // node check
  const SignalModel& m = cfg.model;
  WaveformRecord rec = generate_steady(cfg, sc.duration, sc.rng_seed);
  std::mt19937_64 rng(mix_seed(sc.rng_seed, kStreamDisturbance));
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const std::size_t n = rec.size();
  const std::size_t n0 = std::min(n, index_at(cfg, sc.inception_time));
  const double w = 2.0 * kPi * cfg.system_frequency;

  if (sc.kind == ScenarioKind::capacitor_switching) {
    const double frac = uni(m.cap_step_low, m.cap_step_high);
    const double wr = 2.0 * kPi * m.cap_ring_hz;
    const double yc = wr * m.cap_farads;
    for (int p = 0; p < 3 && n0 < n; ++p) {
      const double dv = frac * rec.channels[p][n0];
      for (std::size_t k = n0; k < n; ++k) {
        const double tt = rec.t[k] - rec.t[n0];
        const double env = std::exp(-tt / m.cap_tau);
        rec.channels[p][k] -= dv * env * std::cos(wr * tt);
        rec.channels[3 + p][k] += dv * yc * env * std::sin(wr * tt);
      }
    }
  } else if (sc.kind == ScenarioKind::nonlinear_load) {
    const double idc = uni(m.rect_dc_low, m.rect_dc_high);
    const double phi0 = initial_angle(sc.rng_seed);
    const double e = m.rect_commutation * w;
    auto trap = [&](double x, double centre) {
      double d = std::fmod(x - centre + kPi, 2.0 * kPi);
      if (d < 0.0) d += 2.0 * kPi;
      d = std::abs(d - kPi);
      return std::clamp((kPi / 3.0 + e / 2.0 - d) / e, 0.0, 1.0);
    };
    for (int p = 0; p < 3; ++p) {
      double last = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = rec.t[k];
        const double ramp = std::clamp((t - sc.inception_time) / m.rect_ramp, 0.0, 1.0);
        double il = 0.0;
        if (ramp > 0.0) {
          double th = std::fmod(w * t + phi0 + kPhaseAngle[p] - m.rect_angle, 2.0 * kPi);
          if (th < 0.0) th += 2.0 * kPi;
          il = idc * ramp * (trap(th, kPi / 2.0) - trap(th, 3.0 * kPi / 2.0));
        }
        rec.channels[3 + p][k] += il;
        rec.channels[p][k] -= m.rect_inductance * (il - last) * cfg.sample_rate;
        last = il;
      }
    }
  } else {
    const double ipk = uni(m.inrush_peak_low, m.inrush_peak_high);
    const int p = int(sc.fault_phase);
    for (std::size_t k = n0; k < n; ++k) {
      const double tt = rec.t[k] - rec.t[n0];
      const double s = 1.0 - std::cos(w * tt);
      const double inr = ipk * std::exp(-tt / m.inrush_tau) * s * s / 4.0;
      rec.channels[3 + p][k] += inr;
      rec.channels[p][k] -= m.inrush_drop * inr;
    }
  }
  rec.label = Label::non_fault;
  rec.scenario = sc;
  return rec;
}

WaveformRecord generate(const FeederConfig& cfg, const Scenario& sc) {
  WaveformRecord rec;
  if (sc.kind == ScenarioKind::steady) {
    sc.validate();
    rec = generate_steady(cfg, sc.duration, sc.rng_seed);
    rec.scenario = sc;
  } else if (is_fault_kind(sc.kind)) {
    rec = generate_hif(cfg, sc);
  } else {
    rec = generate_disturbance(cfg, sc);
  }
  if (sc.snr_db) {
    rec = add_awgn(rec, *sc.snr_db, mix_seed(sc.rng_seed, kStreamNoise));
    rec.scenario = sc;
  }
  return rec;
}

WaveformRecord add_awgn(const WaveformRecord& rec, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db)) throw std::invalid_argument("add_awgn: snr_db is NaN");
  WaveformRecord out = rec;
  if (std::isinf(snr_db) && snr_db > 0) return out;
  std::mt19937_64 rng(seed);
  for (int c = 3; c < 6; ++c) {
    auto& x = out.channels[c];
    if (x.empty()) continue;
    double power = 0.0;
    for (double v : x) power += v * v;
    power /= double(x.size());
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    std::normal_distribution<double> g(0.0, sigma);
    for (double& v : x) v += g(rng);
  }
  return out;
}

}  // namespace hifd
