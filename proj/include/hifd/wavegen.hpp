#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hifd {

enum class Phase { A = 0, B = 1, C = 2 };
enum class ScenarioKind { steady, hif, capacitor_switching, nonlinear_load, inrush, intermittent_hif };
enum class Label { non_fault, fault };

std::string to_string(Phase p);
std::string to_string(ScenarioKind k);
std::string to_string(Label l);
Phase phase_from_string(const std::string& s);
ScenarioKind kind_from_string(const std::string& s);

struct PhaseLoad {
  double kw = 0.0;
  double kvar = 0.0;
};

struct NodeLoad {
  std::string node;
  PhaseLoad phase[3];
};

struct Line {
  std::string node_a;
  std::string node_b;
  double length_ft = 0.0;
  std::string phasing;
};

// Waveshape constants of the synthetic signal model.
struct SignalModel {
  double source_resistance = 0.02;  // ohms
  double source_reactance = 0.1;    // ohms at the system frequency
  double fifth_harmonic = 0.01;     // of each load current
  // HIF relay-side signature
  double arc_voltage_gain = 16.0;   // ohms, HF voltage per ampere of arc current
  double arc_current_share = 0.15;  // HF component added to the relay current
  double arc_band_low = 1500.0;     // hertz
  double arc_band_high = 2500.0;
  int arc_tones = 1;
  double arc_decay = 0.002;         // seconds, arc envelope hold after conduction stops
  double remote_attenuation = 0.25;  // relay-side factor at the farthest node
  double intermittent_on_cycles = 3.5;
  // capacitor bank energization
  double cap_ring_hz = 600.0;
  double cap_tau = 0.005;              // seconds, 5% after 3 tau
  double cap_step_low = 0.3;           // voltage collapse fraction range
  double cap_step_high = 0.5;
  double cap_farads = 200e-6;
  // six-pulse rectifier
  double rect_dc_low = 80.0;           // amperes
  double rect_dc_high = 120.0;
  double rect_commutation = 0.0005;    // seconds
  double rect_ramp = 0.03;             // seconds
  double rect_inductance = 10.0 / (2.0 * 3.14159265358979323846 * 1000.0);  // henry
  double rect_angle = 0.3;             // radians behind the phase voltage
  // transformer inrush
  double inrush_peak_low = 200.0;      // amperes
  double inrush_peak_high = 400.0;
  double inrush_tau = 0.1;             // seconds
  double inrush_drop = 0.1;            // ohms
};

struct FeederConfig {
  double nominal_line_voltage = 4160.0;
  double system_frequency = 60.0;
  double sample_rate = 10000.0;
  std::string source_node = "650";
  std::vector<NodeLoad> loads;
  std::vector<Line> lines;
  SignalModel model;

  void validate() const;
  double phase_voltage() const;  // line-to-neutral rms
  std::map<std::string, double> path_lengths() const;  // feet from the source
  PhaseLoad total_load(Phase p) const;
};

// IEEE 13-node feeder tables.
FeederConfig ieee13_config();

struct HifSurfaceParams {
  std::string name;
  double r1_ohms = 0.0;
  double r1_rel_tol = 0.0;
  double r2_ohms = 0.0;
  double r2_rel_tol = 0.0;
  double v1_volts = 0.0;
  double v1_tol = 0.0;
  double v2_volts = 0.0;
  double v2_tol = 0.0;
  double rerandomize_interval = 0.0;  // seconds; <= 0 means one half cycle

  void validate() const;
};

const std::vector<HifSurfaceParams>& surface_table();
const HifSurfaceParams& surface_by_name(const std::string& name);

// One draw of the diode-model parameters.
struct HifSample {
  double r1 = 0.0, r2 = 0.0, v1 = 0.0, v2 = 0.0;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::steady;
  std::optional<HifSurfaceParams> surface;
  std::string fault_node = "632";
  Phase fault_phase = Phase::A;
  double inception_time = 0.05;
  double duration = 0.5;
  std::optional<double> snr_db;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct WaveformRecord {
  double sample_rate = 10000.0;
  std::vector<double> t;
  std::vector<double> channels[6];  // va vb vc ia ib ic
  Label label = Label::non_fault;
  Scenario scenario;

  std::size_t size() const { return t.size(); }
  bool operator==(const WaveformRecord& o) const;
};

Label label_for(ScenarioKind k);
bool is_fault_kind(ScenarioKind k);

// Piecewise antiparallel-diode law.
double hif_current(double v, const HifSample& p);

// Steady-state phasors (rms) at the relay.
struct SteadyPhasors {
  std::complex<double> v[3];
  std::complex<double> i[3];
};
SteadyPhasors steady_phasors(const FeederConfig& cfg);

// Relay-side distortion factor for a fault at `node`.
double attenuation(const FeederConfig& cfg, const std::string& node);

WaveformRecord generate_steady(const FeederConfig& cfg, double duration, std::uint64_t seed);

// Fault current at the fault point and its arc component, sample by sample.
struct HifInjection {
  std::vector<double> fault_current;
  std::vector<double> arc;
};
HifInjection hif_injection(const FeederConfig& cfg, const Scenario& sc, const std::vector<double>& v_phase);

WaveformRecord generate_hif(const FeederConfig& cfg, const Scenario& sc);
WaveformRecord generate_disturbance(const FeederConfig& cfg, const Scenario& sc);

// Dispatches on kind, then applies scenario.snr_db if set.
WaveformRecord generate(const FeederConfig& cfg, const Scenario& sc);

// Noise on current channels only; infinite snr_db returns the record unchanged.
WaveformRecord add_awgn(const WaveformRecord& rec, double snr_db, std::uint64_t seed);

// Deterministic sub-seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hifd
