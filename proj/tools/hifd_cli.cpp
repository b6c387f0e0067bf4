// hifd: corpus generation, training, calibration, replay and evaluation.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hifd/cae.hpp"
#include "hifd/corpus.hpp"
#include "hifd/detector.hpp"
#include "hifd/eval.hpp"
#include "hifd/io_util.hpp"
#include "hifd/waveform_io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, failure = 1, bad_args = 2, missing = 3, rejected = 4 };

// Prerequisite present but unusable (corrupt JSON, wrong version).
struct BadPrerequisite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto prerequisite(const fs::path& p, F&& load) {
  if (!fs::exists(p)) throw hifd::MissingFile(p);
  try {
    return load(p);
  } catch (const hifd::MissingFile&) {
    throw;
  } catch (const std::exception& e) {
    throw BadPrerequisite(p.string() + ": " + e.what());
  }
}

void echo(const std::string& cmd, ordered_json cfg) {
  ordered_json j;
  j["command"] = cmd;
  for (auto& [k, v] : cfg.items()) j[k] = v;
  std::cout << j.dump() << std::endl;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

fs::path curve_path_for(const fs::path& model) {
  fs::path p = model;
  p.replace_extension(".curve.csv");
  return p;
}

// Artifacts store the model path relative to their own directory.
fs::path model_from_artifacts(const fs::path& artifacts, const hifd::DetectorArtifacts& a) {
  fs::path m(a.model_path);
  if (m.is_relative()) m = artifacts.parent_path() / m;
  return m;
}

hifd::CaeModel load_model_checked(const fs::path& p) {
  return prerequisite(p, [](const fs::path& q) { return hifd::load_model(q); });
}

hifd::DetectorArtifacts load_artifacts_checked(const fs::path& p) {
  return prerequisite(p, [](const fs::path& q) { return hifd::load_artifacts(q); });
}

std::vector<hifd::WindowMatrix> train_windows(const hifd::EvalCorpus& c, const hifd::WindowingPolicy& p) {
  return hifd::load_windows(c, c.split.train_fault, p);
}

struct GenArgs {
  fs::path out;
  std::uint64_t seed = 0;
  std::string surfaces, locations;
  bool force = false;
};

int cmd_gen(const GenArgs& g) {
  hifd::CorpusOptions opt;
  opt.seed = g.seed;
  opt.surfaces = split_list(g.surfaces);
  opt.locations = split_list(g.locations);
  const auto cfg = hifd::ieee13_config();
  const auto scenarios = hifd::corpus_scenarios(cfg, opt);
  const auto locs = opt.locations.empty() ? hifd::default_locations() : opt.locations;
  ordered_json surf = ordered_json::array();
  if (opt.surfaces.empty())
    for (const auto& s : hifd::surface_table()) surf.push_back(s.name);
  else
    for (const auto& s : opt.surfaces) surf.push_back(s);
  echo("gen", {{"out", g.out.string()},
               {"seed", g.seed},
               {"surfaces", surf},
               {"locations", locs},
               {"record_duration", opt.record_duration},
               {"fault_inception", opt.fault_inception},
               {"steady_records", opt.steady_records},
               {"capacitor_records", opt.capacitor_records},
               {"nonlinear_records", opt.nonlinear_records},
               {"inrush_records", opt.inrush_records},
               {"force", g.force}});
  const auto st = hifd::write_corpus(g.out, cfg, scenarios, g.force);
  std::cout << "fault records " << st.fault_records << ", non-fault records " << st.non_fault_records
            << "\nfault windows " << st.fault_windows << ", non-fault windows " << st.non_fault_windows << "\n";
  return ok;
}

struct TrainArgs {
  fs::path corpus, out;
  std::uint64_t seed = 0;
  int epochs = 100;
  bool quiet = false;
};

int cmd_train(const TrainArgs& t) {
  auto manifest = prerequisite(t.corpus / "manifest.json", [&](const fs::path&) { return hifd::load_manifest(t.corpus); });
  hifd::TrainConfig cfg;
  cfg.seed = t.seed;
  cfg.epochs = t.epochs;
  cfg.validate();
  hifd::CaeTopology topo;
  echo("train", {{"corpus", t.corpus.string()},
                 {"out", t.out.string()},
                 {"curve", curve_path_for(t.out).string()},
                 {"seed", t.seed},
                 {"epochs", cfg.epochs},
                 {"batch", cfg.batch},
                 {"lr", cfg.lr},
                 {"patience", cfg.patience},
                 {"val_fraction", cfg.val_fraction},
                 {"window", hifd::training_policy().raw_window},
                 {"stride", hifd::training_policy().stride},
                 {"order", hifd::training_policy().order}});
  if (!t.quiet)
    cfg.on_epoch = [](int e, double tr, double va) {
      std::fprintf(stderr, "epoch %d train %.6g val %.6g\n", e, tr, va);
    };
  hifd::EvalCorpus c;
  c.dir = t.corpus;
  c.manifest = std::move(manifest);
  c.split = hifd::split_corpus(c.manifest, t.seed);
  const auto windows = train_windows(c, hifd::training_policy());
  hifd::CaeModel m = hifd::init_cae(topo, cfg.seed);
  hifd::train_model(m, windows, cfg);
  m.training.train_records = c.split.train_fault;
  hifd::save_model(t.out, m);
  hifd::atomic_write(curve_path_for(t.out), hifd::curve_csv(m.training));
  std::cout << "train windows " << m.training.train_windows << ", validation windows " << m.training.val_windows
            << ", epochs " << m.training.epochs_run << ", best epoch " << m.training.best_epoch
            << ", best validation mse " << hifd::format_double(m.training.best_val_mse) << "\n";
  return ok;
}

struct CalibrateArgs {
  fs::path corpus, model, out;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto model = load_model_checked(a.model);
  auto c = prerequisite(a.corpus / "manifest.json",
                        [&](const fs::path&) { return hifd::EvalCorpus::open(a.corpus, model); });
  echo("calibrate", {{"corpus", a.corpus.string()}, {"model", a.model.string()}, {"out", a.out.string()}});
  auto art = hifd::calibrate(model, train_windows(c, hifd::training_policy()));
  const fs::path base = fs::absolute(a.out).parent_path();
  art.model_path = fs::absolute(a.model).lexically_normal().lexically_relative(base.lexically_normal()).string();
  hifd::save_artifacts(a.out, art);
  std::cout << hifd::artifacts_to_json(art);
  return ok;
}

struct ReplayArgs {
  fs::path record, artifacts, out;
  std::optional<double> inception;
  std::string policy = "online";
};

int cmd_replay(const ReplayArgs& r) {
  const auto art = load_artifacts_checked(r.artifacts);
  const fs::path mp = model_from_artifacts(r.artifacts, art);
  const auto model = load_model_checked(mp);
  auto rec = prerequisite(r.record, [](const fs::path& p) { return hifd::read_record_csv(p); });
  const auto policy = r.policy == "training" ? hifd::training_policy() : hifd::online_policy();
  echo("replay", {{"record", r.record.string()},
                  {"artifacts", r.artifacts.string()},
                  {"model", mp.string()},
                  {"out", r.out.string()},
                  {"policy", r.policy},
                  {"inception", r.inception ? ordered_json(*r.inception) : ordered_json(nullptr)}});
  rec.scenario.inception_time = r.inception.value_or(0.0);
  const auto tr = hifd::replay(rec, art, model, policy);
  hifd::atomic_write(r.out, hifd::trace_csv(tr));
  std::cout << "windows " << tr.rows.size() << ", cae calls " << tr.cae_invocations << ", first trip "
            << (tr.first_trip_ms ? hifd::format_double(*tr.first_trip_ms) + " ms" : std::string("none"))
            << ", tripped at end " << (tr.tripped_at_end ? "yes" : "no") << "\n";
  return ok;
}

struct EvalArgs {
  fs::path corpus, artifacts, out;
  std::string snr;
  std::string ablation;
  int epochs = 100;
  bool cases = true;
};

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  char b[32];
  std::snprintf(b, sizeof b, "%.2f%%", *v);
  return b;
}

int cmd_eval(const EvalArgs& e) {
  const auto art = load_artifacts_checked(e.artifacts);
  const fs::path mp = model_from_artifacts(e.artifacts, art);
  const auto model = load_model_checked(mp);
  auto c = prerequisite(e.corpus / "manifest.json",
                        [&](const fs::path&) { return hifd::EvalCorpus::open(e.corpus, model); });
  std::vector<double> snrs;
  for (const auto& s : split_list(e.snr)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw std::invalid_argument("--snr: not a number: " + s);
    snrs.push_back(v);
  }
  std::vector<std::string> ablations;
  if (!e.ablation.empty() && e.ablation != "all") ablations = split_list(e.ablation);
  for (const auto& n : ablations) hifd::variant_by_name(n);
  echo("eval", {{"corpus", e.corpus.string()},
                {"artifacts", e.artifacts.string()},
                {"model", mp.string()},
                {"out", e.out.string()},
                {"snr", snrs},
                {"ablation", e.ablation.empty() ? ordered_json(nullptr) : ordered_json(e.ablation)},
                {"ablation_epochs", e.epochs},
                {"ablation_seed", model.training.seed},
                {"cases", e.cases}});
  fs::create_directories(e.out);

  const auto full = hifd::evaluate_corpus(art, model, c);
  std::vector<hifd::VariantResult> table{full};
  if (!e.ablation.empty()) {
    hifd::AblationOptions opt;
    opt.variants = ablations;
    opt.train.seed = model.training.seed;
    opt.train.epochs = e.epochs;
    table = hifd::run_ablations(art, model, c, opt);
  }
  hifd::atomic_write(e.out / "metrics.csv", hifd::metrics_csv(table));
  for (const auto& r : table)
    std::cout << r.variant.name << ": acc " << pct(r.report.acc) << " sec " << pct(r.report.sec) << " dep "
              << pct(r.report.dep) << " saf " << pct(r.report.saf) << " sen " << pct(r.report.sen) << "\n";

  if (!snrs.empty()) {
    const auto rows = hifd::noise_sweep(art, model, c, snrs);
    hifd::atomic_write(e.out / "noise.csv", hifd::noise_csv(rows));
    for (const auto& r : rows)
      std::cout << "snr " << (r.snr_db ? hifd::format_double(*r.snr_db) + " dB" : std::string("inf")) << ": acc "
                << pct(r.report.acc) << " sec " << pct(r.report.sec) << " sen " << pct(r.report.sen) << "\n";
  }

  bool cases_ok = true;
  if (e.cases) {
    const auto cases = hifd::run_case_studies(art, model);
    hifd::atomic_write(e.out / "cases.csv", hifd::cases_csv(cases));
    for (const auto& r : cases) {
      hifd::atomic_write(e.out / ("case_" + r.id + ".csv"), hifd::trace_csv(r.trace));
      hifd::atomic_write(e.out / ("case_" + r.id + ".svg"), hifd::trace_svg(r, art));
      std::cout << "case " << r.id << ": " << (r.pass ? "pass" : "FAIL") << " (" << r.detail << ")\n";
      cases_ok = cases_ok && r.pass;
    }
  }

  bool metrics_ok = true;
  for (const auto* v : {&full.report.acc, &full.report.sec, &full.report.dep, &full.report.saf, &full.report.sen})
    metrics_ok = metrics_ok && *v && **v >= 99.0;
  if (!metrics_ok || !cases_ok) {
    std::cerr << "acceptance check failed:" << (metrics_ok ? "" : " metrics below 99%")
              << (cases_ok ? "" : " case study failed") << "\n";
    return rejected;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-impedance fault detection with a convolutional autoencoder"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate the synthetic corpus");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Corpus seed")->required();
  g->add_option("--surfaces", gen.surfaces, "Comma-separated surface names");
  g->add_option("--locations", gen.locations, "Comma-separated fault nodes");
  g->add_flag("--force", gen.force, "Overwrite an existing corpus");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the autoencoder on the training split");
  t->add_option("--corpus", tr.corpus, "Corpus directory")->required();
  t->add_option("--out", tr.out, "Model JSON")->required();
  t->add_option("--seed", tr.seed, "Split, initialisation and shuffle seed")->required();
  t->add_option("--epochs", tr.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  t->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  CalibrateArgs ca;
  auto* c = app.add_subcommand("calibrate", "Derive the CC and K thresholds");
  c->add_option("--corpus", ca.corpus, "Corpus directory")->required();
  c->add_option("--model", ca.model, "Model JSON")->required();
  c->add_option("--out", ca.out, "Artifacts JSON")->required();

  ReplayArgs re;
  auto* r = app.add_subcommand("replay", "Stream one record through the detector");
  r->add_option("--record", re.record, "Record CSV")->required();
  r->add_option("--artifacts", re.artifacts, "Artifacts JSON")->required();
  r->add_option("--out", re.out, "Trace CSV")->required();
  r->add_option("--inception", re.inception, "Fault inception in seconds, for latency");
  r->add_option("--policy", re.policy, "Window stride")->check(CLI::IsMember({"online", "training"}));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Metrics, noise sweep, ablations and case studies");
  e->add_option("--corpus", ev.corpus, "Corpus directory")->required();
  e->add_option("--artifacts", ev.artifacts, "Artifacts JSON")->required();
  e->add_option("--out", ev.out, "Report directory")->required();
  e->add_option("--snr", ev.snr, "Comma-separated SNR levels in dB");
  e->add_option("--ablation", ev.ablation, "Variant name, comma list or 'all'");
  e->add_option("--ablation-epochs", ev.epochs, "Epochs for the raw-window model")->check(CLI::PositiveNumber);
  e->add_flag("!--no-cases", ev.cases, "Skip the case studies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return bad_args;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (t->parsed()) return cmd_train(tr);
    if (c->parsed()) return cmd_calibrate(ca);
    if (r->parsed()) return cmd_replay(re);
    if (e->parsed()) return cmd_eval(ev);
  } catch (const hifd::MissingFile& err) {
    std::cerr << "error: " << err.what() << "\n";
    return missing;
  } catch (const BadPrerequisite& err) {
    std::cerr << "error: " << err.what() << "\n";
    return missing;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return bad_args;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return failure;
  }
  return bad_args;
}
