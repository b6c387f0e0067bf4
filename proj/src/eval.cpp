#include "hifd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hifd/io_util.hpp"

namespace hifd {
namespace {

std::optional<double> pct(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * double(num) / double(den);
}

std::string opt_str(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::uint64_t noise_seed(std::uint64_t seed, double snr) {
  return mix_seed(seed, 0x5EED0000ULL + std::uint64_t(std::llround(std::abs(snr) * 100.0)) + (snr < 0 ? 1ULL << 40 : 0));
}

WindowingPolicy raw_policy() {
  WindowingPolicy p = training_policy();
  p.order = 0;
  return p;
}

}  // namespace

MetricReport metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("metrics: no windows counted");
  MetricReport r;
  r.acc = pct(c.tp + c.tn, c.total());
  r.sec = pct(c.tn, c.tn + c.fp);
  r.dep = pct(c.tp, c.tp + c.fn);
  r.saf = pct(c.tn, c.tn + c.fn);
  r.sen = pct(c.tp, c.tp + c.fp);
  return r;
}

const std::vector<Variant>& ablation_variants() {
  static const std::vector<Variant> v = {
      {"full", "CAE with differencing, CC and K", true, true, true},
      {"cc_k", "CAE with CC, K", false, true, true},
      {"k_diff", "CAE with K, Diff", true, false, true},
      {"cc_diff", "CAE with CC, Diff", true, true, false},
      {"cc", "CAE with CC", false, true, false},
      {"diff", "CAE with Diff", true, false, false},
      {"k", "CAE with K", false, false, true},
  };
  return v;
}

const Variant& variant_by_name(const std::string& name) {
  for (const auto& v : ablation_variants())
    if (v.name == name) return v;
  throw std::invalid_argument("unknown ablation '" + name + "'");
}

std::vector<ScoredWindow> score(const CaeModel& model, const std::vector<WindowMatrix>& windows) {
  std::vector<const WindowMatrix*> ptrs;
  for (const auto& w : windows) ptrs.push_back(&w);
  const Reconstruction r = score_windows(model, ptrs);
  std::vector<ScoredWindow> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out[i].truth = windows[i].label.value_or(Label::non_fault);
    try {
      out[i].k = window_kurtosis(windows[i]).aggregate;
    } catch (const DegenerateInput&) {
      out[i].k = 0.0;
    }
    out[i].cc = r.cc[i];
    out[i].mse = r.mse[i];
  }
  return out;
}

ModelThresholds calibrate_with_mse(const CaeModel& model, const std::vector<WindowMatrix>& train_windows) {
  ModelThresholds th;
  th.artifacts = calibrate(model, train_windows);
  const auto s = score(model, train_windows);
  th.mse_threshold = 0.0;
  for (const auto& w : s) th.mse_threshold = std::max(th.mse_threshold, w.mse);
  return th;
}

bool classify_fault(const ScoredWindow& w, const Variant& v, const ModelThresholds& th) {
  if (v.k_gate && w.k > th.artifacts.k_threshold) return false;
  if (v.use_cc) return w.cc > th.artifacts.cc_threshold;
  return w.mse <= th.mse_threshold;
}

ConfusionCounts count(const std::vector<ScoredWindow>& ws, const Variant& v, const ModelThresholds& th) {
  ConfusionCounts c;
  for (const auto& w : ws) {
    const bool pred = classify_fault(w, v, th);
    const bool truth = w.truth == Label::fault;
    if (pred && truth) ++c.tp;
    else if (!pred && !truth) ++c.tn;
    else if (pred) ++c.fp;
    else ++c.fn;
  }
  return c;
}

EvalCorpus EvalCorpus::open(const std::filesystem::path& dir, const CaeModel& model) {
  EvalCorpus c;
  c.dir = dir;
  c.manifest = load_manifest(dir);
  c.split = split_from_training(c.manifest, model.training.train_records);
  return c;
}

std::vector<std::size_t> EvalCorpus::test_records() const {
  std::vector<std::size_t> ids = split.test_fault;
  ids.insert(ids.end(), split.non_fault.begin(), split.non_fault.end());
  return ids;
}

std::vector<WindowMatrix> load_windows(const EvalCorpus& c, const std::vector<std::size_t>& ids,
                                       const WindowingPolicy& policy, std::optional<double> snr_db) {
  std::vector<std::vector<WindowMatrix>> per(ids.size());
  std::vector<std::string> errors(ids.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < ids.size(); ++i) {
    try {
      WaveformRecord rec = load_record(c.dir, c.manifest, ids[i]);
      if (snr_db) rec = add_awgn(rec, *snr_db, noise_seed(rec.scenario.rng_seed, *snr_db));
      per[i] = record_windows(rec, policy, scenario_file_name(ids[i]));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
  std::vector<WindowMatrix> out;
  for (auto& v : per)
    for (auto& w : v) out.push_back(std::move(w));
  return out;
}

VariantResult evaluate_corpus(const DetectorArtifacts& a, const CaeModel& model, const EvalCorpus& c) {
  const auto windows = load_windows(c, c.test_records(), training_policy());
  if (windows.empty()) throw std::invalid_argument("evaluate_corpus: empty corpus");
  ModelThresholds th;
  th.artifacts = a;
  VariantResult r;
  r.variant = variant_by_name("full");
  r.counts = count(score(model, windows), r.variant, th);
  r.report = metrics(r.counts);
  return r;
}

std::vector<VariantResult> run_ablations(const DetectorArtifacts& a, const CaeModel& model, const EvalCorpus& c,
                                         const AblationOptions& opt) {
  std::vector<Variant> wanted;
  if (opt.variants.empty())
    wanted = ablation_variants();
  else
    for (const auto& n : opt.variants) wanted.push_back(variant_by_name(n));

  const bool need_raw = std::any_of(wanted.begin(), wanted.end(), [](const Variant& v) { return !v.differencing; });
  const bool need_mse = std::any_of(wanted.begin(), wanted.end(), [](const Variant& v) { return !v.use_cc; });

  const auto test_ids = c.test_records();
  ModelThresholds diff_th;
  diff_th.artifacts = a;
  if (need_mse) {
    const auto train_w = load_windows(c, c.split.train_fault, training_policy());
    diff_th.mse_threshold = calibrate_with_mse(model, train_w).mse_threshold;
  }
  const auto diff_scores = score(model, load_windows(c, test_ids, training_policy()));

  std::vector<ScoredWindow> raw_scores;
  ModelThresholds raw_th;
  if (need_raw) {
    const auto raw_train = load_windows(c, c.split.train_fault, raw_policy());
    CaeTopology topo = model.topology;
    topo.input_steps = raw_policy().steps();
    CaeModel raw = init_cae(topo, opt.train.seed);
    train_model(raw, raw_train, opt.train);
    raw.training.train_records = c.split.train_fault;
    raw_th = calibrate_with_mse(raw, raw_train);
    raw_scores = score(raw, load_windows(c, test_ids, raw_policy()));
  }

  std::vector<VariantResult> out;
  for (const auto& v : wanted) {
    VariantResult r;
    r.variant = v;
    r.counts = v.differencing ? count(diff_scores, v, diff_th) : count(raw_scores, v, raw_th);
    r.report = metrics(r.counts);
    out.push_back(r);
  }
  return out;
}

std::vector<NoiseRow> noise_sweep(const DetectorArtifacts& a, const CaeModel& model, const EvalCorpus& c,
                                  const std::vector<double>& snrs) {
  ModelThresholds th;
  th.artifacts = a;
  const Variant& full = variant_by_name("full");
  std::vector<NoiseRow> rows;
  std::vector<std::optional<double>> levels{std::nullopt};
  for (double s : snrs) levels.push_back(s);
  for (const auto& snr : levels) {
    NoiseRow row;
    row.snr_db = snr;
    row.counts = count(score(model, load_windows(c, c.test_records(), training_policy(), snr)), full, th);
    row.report = metrics(row.counts);
    rows.push_back(row);
  }
  return rows;
}

namespace {

struct CaseDef {
  std::string id;
  std::string description;
  Scenario scenario;
  double frequency = 60.0;
  bool expect_trip = false;
  std::optional<double> target_ms;
  double tolerance_cycles = 1.0;
};

std::vector<CaseDef> case_defs() {
  auto hif = [](const std::string& surface, const std::string& node, std::uint64_t seed) {
    Scenario s;
    s.kind = ScenarioKind::hif;
    s.surface = surface_by_name(surface);
    s.fault_node = node;
    s.fault_phase = Phase::A;
    s.inception_time = 0.05;
    s.duration = 0.25;
    s.rng_seed = seed;
    return s;
  };
  auto dist = [](ScenarioKind k, const std::string& node, std::uint64_t seed) {
    Scenario s;
    s.kind = k;
    s.fault_node = node;
    s.fault_phase = Phase::A;
    s.inception_time = 0.05;
    s.duration = 0.25;
    s.rng_seed = seed;
    return s;
  };
  std::vector<CaseDef> d;
  d.push_back({"I", "close-in HIF, wet sand at node 632", hif("wet_sand", "632", 1001), 60.0, true, 60.0});
  d.push_back({"II", "remote HIF, wet sod at node 652", hif("wet_sod", "652", 1002), 60.0, true, 50.0});
  d.push_back({"III", "capacitor bank switching at node 675", dist(ScenarioKind::capacitor_switching, "675", 1003),
               60.0, false, std::nullopt});
  d.push_back({"IV", "nonlinear load at node 634", dist(ScenarioKind::nonlinear_load, "634", 1004), 60.0, false,
               std::nullopt});
  d.push_back({"V", "transformer inrush at node 633", dist(ScenarioKind::inrush, "633", 1005), 60.0, false,
               std::nullopt});
  Scenario vi = hif("tree_branch", "671", 1006);
  vi.kind = ScenarioKind::intermittent_hif;
  d.push_back({"VI", "intermittent HIF, tree branch at node 671", vi, 60.0, true, std::nullopt});
  // three cycles at 61 Hz, upper bound only
  d.push_back({"VII", "HIF at 61 Hz, wet sand at node 632", hif("wet_sand", "632", 1007), 61.0, true, 3000.0 / 61.0});
  return d;
}

}  // namespace

std::vector<Scenario> case_scenarios() {
  std::vector<Scenario> out;
  for (const auto& d : case_defs()) out.push_back(d.scenario);
  return out;
}

std::vector<CaseResult> run_case_studies(const DetectorArtifacts& a, const CaeModel& model, const CaseStudyOptions& opt) {
  std::vector<CaseResult> out;
  for (const auto& d : case_defs()) {
    FeederConfig cfg = ieee13_config();
    cfg.system_frequency = d.frequency;
    Scenario sc = d.scenario;
    sc.snr_db = opt.snr_db;
    const WaveformRecord rec = generate(cfg, sc);

    CaseResult r;
    r.id = d.id;
    r.description = d.description;
    r.expect_trip = d.expect_trip;
    r.target_ms = d.target_ms;
    r.frequency = d.frequency;
    r.tolerance_ms = 1000.0 * d.tolerance_cycles / d.frequency;
    r.trace = replay(rec, a, model, online_policy());
    const bool tripped = r.trace.first_trip_ms.has_value();
    std::ostringstream why;
    if (!d.expect_trip) {
      r.pass = !tripped;
      why << (tripped ? "unexpected trip" : "no trip");
    } else if (!tripped) {
      r.pass = false;
      why << "no trip";
    } else {
      const double lat = *r.trace.latency_ms;
      why << "trip " << format_double(std::round(lat * 10.0) / 10.0) << " ms after inception";
      r.pass = true;
      if (opt.check_latency && d.target_ms) {
        if (d.id == "VII") {
          r.pass = lat <= *d.target_ms + r.tolerance_ms;
          why << (lat <= *d.target_ms ? ", within three cycles" : ", beyond three cycles");
        } else {
          r.pass = std::abs(lat - *d.target_ms) <= r.tolerance_ms;
        }
      }
      if (sc.kind == ScenarioKind::intermittent_hif) {
        const double clear_ms =
            1e3 * (sc.inception_time + cfg.model.intermittent_on_cycles / cfg.system_frequency);
        std::optional<double> release_ms;
        bool prev = false;
        for (const auto& row : r.trace.rows) {
          if (prev && !row.trip) release_ms = row.t_ms;
          prev = row.trip;
        }
        const bool reset = !r.trace.tripped_at_end && release_ms && *release_ms >= clear_ms;
        r.pass = r.pass && reset;
        why << (reset ? ", reset " + format_double(std::round((*release_ms - clear_ms) * 10.0) / 10.0) +
                            " ms after clearing"
                      : ", no reset after clearing");
      }
    }
    r.detail = why.str();
    out.push_back(std::move(r));
  }
  return out;
}

std::string metrics_csv(const std::vector<VariantResult>& rows) {
  std::string s = "variant,description,tp,tn,fp,fn,acc,sec,dep,saf,sen\n";
  for (const auto& r : rows) {
    s += r.variant.name + "," + r.variant.description + "," + std::to_string(r.counts.tp) + "," +
         std::to_string(r.counts.tn) + "," + std::to_string(r.counts.fp) + "," + std::to_string(r.counts.fn) + "," +
         opt_str(r.report.acc) + "," + opt_str(r.report.sec) + "," + opt_str(r.report.dep) + "," +
         opt_str(r.report.saf) + "," + opt_str(r.report.sen) + "\n";
  }
  return s;
}

std::string noise_csv(const std::vector<NoiseRow>& rows) {
  std::string s = "snr_db,tp,tn,fp,fn,acc,sec,dep,saf,sen\n";
  for (const auto& r : rows) {
    s += (r.snr_db ? format_double(*r.snr_db) : std::string("inf")) + "," + std::to_string(r.counts.tp) + "," +
         std::to_string(r.counts.tn) + "," + std::to_string(r.counts.fp) + "," + std::to_string(r.counts.fn) + "," +
         opt_str(r.report.acc) + "," + opt_str(r.report.sec) + "," + opt_str(r.report.dep) + "," +
         opt_str(r.report.saf) + "," + opt_str(r.report.sen) + "\n";
  }
  return s;
}

std::string cases_csv(const std::vector<CaseResult>& rows) {
  std::string s = "case,description,frequency_hz,expect_trip,tripped,latency_ms,target_ms,pass,detail\n";
  for (const auto& r : rows) {
    s += r.id + "," + r.description + "," + format_double(r.frequency) + "," + (r.expect_trip ? "1" : "0") + "," +
         (r.trace.first_trip_ms ? "1" : "0") + "," + (r.trace.latency_ms ? opt_str(r.trace.latency_ms) : "") + "," +
         opt_str(r.target_ms) + "," + (r.pass ? "1" : "0") + "," + r.detail + "\n";
  }
  return s;
}

std::string trace_svg(const CaseResult& r, const DetectorArtifacts& a) {
  const double w = 720, h = 150, pad = 40;
  const auto& rows = r.trace.rows;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << 3 * h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (rows.empty()) {
    o << "</svg>\n";
    return o.str();
  }
  const double t0 = rows.front().t_ms, t1 = rows.back().t_ms;
  auto x = [&](double t) { return pad + (w - 2 * pad) * (t - t0) / std::max(1e-9, t1 - t0); };
  auto panel = [&](int idx, const std::string& title, auto value, double threshold, bool log_scale) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : rows) {
      const auto v = value(row);
      if (!v) continue;
      double y = log_scale ? std::log10(std::max(*v, 1e-12)) : *v;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    const double thr = log_scale ? std::log10(std::max(threshold, 1e-12)) : threshold;
    lo = std::min(lo, thr);
    hi = std::max(hi, thr);
    if (hi - lo < 1e-12) hi = lo + 1;
    const double top = idx * h + 15, bottom = (idx + 1) * h - 20;
    auto y = [&](double v) { return bottom - (bottom - top) * (v - lo) / (hi - lo); };
    o << "<text x=\"" << pad << "\" y=\"" << top - 3 << "\">" << title << "</text>\n";
    o << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
    for (const auto& row : rows) {
      const auto v = value(row);
      if (!v) continue;
      o << x(row.t_ms) << "," << y(log_scale ? std::log10(std::max(*v, 1e-12)) : *v) << " ";
    }
    o << "\"/>\n";
    if (std::isfinite(threshold))
      o << "<line x1=\"" << pad << "\" x2=\"" << w - pad << "\" y1=\"" << y(thr) << "\" y2=\"" << y(thr)
        << "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
    o << "<text x=\"" << pad << "\" y=\"" << bottom + 14 << "\">" << format_double(std::round(t0)) << " ms</text>\n";
    o << "<text x=\"" << w - pad - 40 << "\" y=\"" << bottom + 14 << "\">" << format_double(std::round(t1)) << " ms</text>\n";
  };
  panel(0, "Case " + r.id + ": kurtosis", [](const TraceRow& row) { return std::optional<double>(row.k); },
        a.k_threshold, false);
  panel(1, "CC (log10)", [](const TraceRow& row) { return row.cc; }, a.cc_threshold, true);
  panel(2, "trip", [](const TraceRow& row) { return std::optional<double>(row.trip ? 1.0 : 0.0); },
        std::numeric_limits<double>::quiet_NaN(), false);
  o << "</svg>\n";
  return o.str();
}

}  // namespace hifd
