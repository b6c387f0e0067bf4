#include <doctest.h>

#include <filesystem>

#include "hifd/eval.hpp"

using namespace hifd;

TEST_SUITE("eval") {
  TEST_CASE("metric definitions") {
    ConfusionCounts c{90, 40, 10, 5};
    const auto r = metrics(c);
    CHECK(*r.acc == doctest::Approx(100.0 * 130 / 145));
    CHECK(*r.sec == doctest::Approx(100.0 * 40 / 50));
    CHECK(*r.dep == doctest::Approx(100.0 * 90 / 95));
    CHECK(*r.saf == doctest::Approx(100.0 * 40 / 45));
    CHECK(*r.sen == doctest::Approx(100.0 * 90 / 100));
    const auto only_faults = metrics(ConfusionCounts{5, 0, 0, 0});
    CHECK(!only_faults.sec);
    CHECK(!only_faults.saf);
    CHECK(*only_faults.acc == 100.0);
    CHECK_THROWS(metrics(ConfusionCounts{}));
  }

  TEST_CASE("variant table") {
    const auto& v = ablation_variants();
    CHECK(v.size() == 7);
    CHECK(v.front().name == "full");
    CHECK(variant_by_name("cc_k").differencing == false);
    CHECK(variant_by_name("k_diff").use_cc == false);
    CHECK(variant_by_name("cc_diff").k_gate == false);
    CHECK_THROWS(variant_by_name("bogus"));
  }

  TEST_CASE("classification per variant") {
    ModelThresholds th;
    th.artifacts.cc_threshold = 10.0;
    th.artifacts.k_threshold = 10.0;
    th.mse_threshold = 1.0;
    const ScoredWindow gated{Label::non_fault, 20.0, 50.0, 0.5};
    const ScoredWindow low_cc{Label::non_fault, 3.0, 5.0, 0.5};
    const ScoredWindow fault{Label::fault, 3.0, 50.0, 2.0};
    CHECK(!classify_fault(gated, variant_by_name("full"), th));
    CHECK(classify_fault(gated, variant_by_name("cc_diff"), th));
    CHECK(!classify_fault(low_cc, variant_by_name("full"), th));
    CHECK(classify_fault(low_cc, variant_by_name("diff"), th));
    CHECK(classify_fault(fault, variant_by_name("full"), th));
    CHECK(!classify_fault(fault, variant_by_name("k_diff"), th));
    const auto c = count({gated, low_cc, fault}, variant_by_name("full"), th);
    CHECK(c == ConfusionCounts{1, 2, 0, 0});
    const auto d = count({gated, low_cc, fault}, variant_by_name("diff"), th);
    CHECK(d == ConfusionCounts{0, 0, 2, 1});
  }

  TEST_CASE("case study scenarios") {
    const auto sc = case_scenarios();
    REQUIRE(sc.size() == 7);
    CHECK(sc[0].kind == ScenarioKind::hif);
    CHECK(sc[0].fault_node == "632");
    CHECK(sc[1].fault_node == "652");
    CHECK(sc[2].kind == ScenarioKind::capacitor_switching);
    CHECK(sc[3].kind == ScenarioKind::nonlinear_load);
    CHECK(sc[4].kind == ScenarioKind::inrush);
    CHECK(sc[5].kind == ScenarioKind::intermittent_hif);
    for (const auto& s : sc) CHECK_NOTHROW(s.validate());
  }

  TEST_CASE("report csv layout") {
    VariantResult r;
    r.variant = variant_by_name("full");
    r.counts = {3, 1, 0, 0};
    r.report = metrics(r.counts);
    CHECK(metrics_csv({r}) ==
          "variant,description,tp,tn,fp,fn,acc,sec,dep,saf,sen\n"
          "full,CAE with differencing, CC and K,3,1,0,0,100.00,100.00,100.00,100.00,100.00\n");
  }

  TEST_CASE("noisy window loading is seeded and repeatable") {
    const auto dir = std::filesystem::temp_directory_path() / "hifd_eval_unit";
    std::filesystem::remove_all(dir);
    const auto cfg = ieee13_config();
    CorpusOptions opt;
    opt.surfaces = {"wet_sod"};
    opt.locations = {"645", "684"};
    opt.steady_records = 1;
    opt.capacitor_records = opt.nonlinear_records = opt.inrush_records = 1;
    const auto sc = corpus_scenarios(cfg, opt);
    write_corpus(dir, cfg, sc, false);
    CaeModel m;
    m.training.train_records = split_corpus(sc, 1).train_fault;
    const auto c = EvalCorpus::open(dir, m);
    CHECK(c.split.test_fault.size() == 1);
    CHECK(c.test_records().size() == 1 + 4);
    const auto a = load_windows(c, c.test_records(), training_policy(), 10.0);
    const auto b = load_windows(c, c.test_records(), training_policy(), 10.0);
    const auto clean = load_windows(c, c.test_records(), training_policy());
    REQUIRE(a.size() == clean.size());
    CHECK(a.size() == 7 + 4 * 10);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && a[i].values == b[i].values;
      differs = differs || a[i].values != clean[i].values;
    }
    CHECK(same);
    CHECK(differs);
    std::filesystem::remove_all(dir);
  }
}
