#include <doctest.h>

#include <json.hpp>

#include "foveate/pipeline.hpp"
#include "foveate/scripted_backend.hpp"
#include "support/test_util.hpp"

using namespace foveate;
using nlohmann::json;

namespace {

Corpus small_corpus(int docs) {
  Corpus corpus;
  corpus.name = "test";
  static const char* kTexts[] = {
      "In the realm of technology, speed is not just a luxury. The QuantumX "
      "processor turns raw silicon into everyday habit for millions of users.",
      "The northern observatory tracks distant pulsars nightly. Its massive "
      "dish antenna listens for whispers older than the mountains around it.",
      "A small bakery on Elm Street perfected sourdough over forty years. The "
      "starter culture passed between three generations of determined bakers.",
      "Electric ferries now cross the harbor every twenty minutes. Their "
      "battery banks charge from tidal turbines anchored beneath the pier.",
      "The archive preserves early radio dramas on fragile acetate discs. "
      "Volunteers digitize each recording before the lacquer crumbles away.",
  };
  for (int i = 0; i < docs; ++i) {
    Document d;
    d.id = "doc-" + std::to_string(i);
    d.text = kTexts[i % 5];
    corpus.documents.push_back(std::move(d));
  }
  return corpus;
}

Gateway scripted_gateway(std::shared_ptr<ScriptedBackend>& backend_out) {
  backend_out = ScriptedBackend::with_pipeline_rules();
  GatewayOptions options;
  options.sleep_fn = [](std::chrono::milliseconds) {};
  return Gateway(backend_out, options);
}

PipelineConfig test_config() {
  PipelineConfig config;
  config.backend.kind = "scripted";
  config.elements_per_doc = 3;
  config.groups_per_doc = 2;
  config.max_segments = 2;
  config.seed = 42;
  return config;
}

}  // namespace

TEST_CASE("micro-only run produces exactly docs x k records") {
  Corpus corpus = small_corpus(2);
  PipelineConfig config = test_config();
  config.levels = LevelFlags{true, false, false};

  std::shared_ptr<ScriptedBackend> backend;
  Gateway gateway = scripted_gateway(backend);
  RunResult result = run_pipeline(corpus, config, gateway);

  REQUIRE(result.dataset.size() == 6);  // 2 docs x k=3
  for (const auto& r : result.dataset) {
    CHECK(r.level == Level::micro);
    CHECK(level_matches_provenance(r));
    CHECK((r.status == RecordStatus::verified ||
           r.status == RecordStatus::resynthesized));
  }
  CHECK(result.ledger.level_totals().at("micro") == 6);
}

TEST_CASE("accumulation: dataset size equals the ledger per-doc per-level sums") {
  Corpus corpus = small_corpus(5);
  PipelineConfig config = test_config();

  std::shared_ptr<ScriptedBackend> backend;
  Gateway gateway = scripted_gateway(backend);
  RunResult result = run_pipeline(corpus, config, gateway);

  CHECK(result.dataset.size() > 0);
  CHECK(static_cast<long>(result.dataset.size()) ==
        result.ledger.total_records());

  std::map<std::string, long> counted;
  for (const auto& r : result.dataset) {
    ++counted[std::string(level_name(r.level))];
  }
  CHECK(counted == result.ledger.level_totals());
}

TEST_CASE("disabling a level removes exactly that level's records") {
  Corpus corpus = small_corpus(3);
  PipelineConfig full_config = test_config();

  std::shared_ptr<ScriptedBackend> backend_full;
  Gateway gateway_full = scripted_gateway(backend_full);
  RunResult full = run_pipeline(corpus, full_config, gateway_full);

  PipelineConfig no_micro = test_config();
  no_micro.levels.micro = false;
  std::shared_ptr<ScriptedBackend> backend_ablated;
  Gateway gateway_ablated = scripted_gateway(backend_ablated);
  RunResult ablated = run_pipeline(corpus, no_micro, gateway_ablated);

  std::vector<InstructionRecord> expected;
  for (const auto& r : full.dataset) {
    if (r.level != Level::micro) expected.push_back(r);
  }
  REQUIRE(ablated.dataset.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(ablated.dataset[i] == expected[i]);
  }
  CHECK(full.ledger.level_totals().count("micro") == 1);
  CHECK(ablated.ledger.level_totals().count("micro") == 0);
}

TEST_CASE("same seed and script give byte-identical exports") {
  Corpus corpus = small_corpus(3);
  PipelineConfig config = test_config();
  testutil::TempDir dir("determinism");

  auto run_and_export = [&](const std::string& name) {
    std::shared_ptr<ScriptedBackend> backend;
    Gateway gateway = scripted_gateway(backend);
    RunResult result = run_pipeline(corpus, config, gateway);
    auto path = dir.file(name);
    export_dataset(result.dataset, ExportFormat::full_provenance, path);
    return testutil::read_file(path);
  };

  CHECK(run_and_export("a.jsonl") == run_and_export("b.jsonl"));
}

TEST_CASE("worker count does not change the export") {
  Corpus corpus = small_corpus(5);
  testutil::TempDir dir("workers");

  auto run_with_workers = [&](int workers, const std::string& name) {
    PipelineConfig config = test_config();
    config.workers = workers;
    std::shared_ptr<ScriptedBackend> backend;
    Gateway gateway = scripted_gateway(backend);
    RunResult result = run_pipeline(corpus, config, gateway);
    auto path = dir.file(name);
    export_dataset(result.dataset, ExportFormat::full_provenance, path);
    return testutil::read_file(path);
  };

  CHECK(run_with_workers(1, "w1.jsonl") == run_with_workers(4, "w4.jsonl"));
}

TEST_CASE("per-document failures are recorded and skipped") {
  Corpus corpus = small_corpus(3);
  PipelineConfig config = test_config();

  std::shared_ptr<ScriptedBackend> backend = std::make_shared<ScriptedBackend>();
  // doc-1's element extraction stays permanently unparseable.
  const PromptTemplates prompts = PromptTemplates::defaults();
  backend->script_reply(
      prompts.system,
      render_template(prompts.element_extraction,
                      {{"count", "6"}, {"document", corpus.documents[1].text}}),
      "   ");
  backend->install_pipeline_rules();
  GatewayOptions options;
  options.sleep_fn = [](std::chrono::milliseconds) {};
  Gateway gateway(backend, options);

  RunResult result = run_pipeline(corpus, config, gateway);
  CHECK(result.ledger.docs.at("doc-1").state == "failed");
  CHECK(result.ledger.docs.at("doc-1").error.find("extraction") !=
        std::string::npos);
  CHECK(result.ledger.docs.at("doc-0").state == "done");
  CHECK(result.ledger.docs.at("doc-2").state == "done");
  for (const auto& r : result.dataset) CHECK(r.doc_id != "doc-1");
}

TEST_CASE("oversized documents are rejected up front, never truncated") {
  Corpus corpus = small_corpus(2);
  corpus.documents[1].text = std::string(5000, 'x') + " end of giant document";

  PipelineConfig config = test_config();
  config.max_document_chars = 1000;

  std::shared_ptr<ScriptedBackend> backend;
  Gateway gateway = scripted_gateway(backend);
  RunResult result = run_pipeline(corpus, config, gateway);

  CHECK(result.ledger.docs.at("doc-1").state == "failed");
  CHECK(result.ledger.docs.at("doc-1").error.find("max_document_chars") !=
        std::string::npos);
  CHECK(result.ledger.docs.at("doc-0").state == "done");

  // The guard is a knob: 0 disables it.
  config.max_document_chars = 0;
  std::shared_ptr<ScriptedBackend> backend2;
  Gateway gateway2 = scripted_gateway(backend2);
  RunResult unguarded = run_pipeline(corpus, config, gateway2);
  CHECK(unguarded.ledger.docs.at("doc-1").state == "done");
}

TEST_CASE("crash after a document boundary resumes to an identical export") {
  Corpus corpus = small_corpus(3);
  testutil::TempDir dir("resume");

  PipelineConfig config = test_config();
  config.ledger_dir = (dir.path() / "ledger_full").string();

  std::shared_ptr<ScriptedBackend> backend;
  Gateway gateway = scripted_gateway(backend);
  RunResult uninterrupted = run_pipeline(corpus, config, gateway);
  auto full_path = dir.file("full.jsonl");
  export_dataset(uninterrupted.dataset, ExportFormat::full_provenance, full_path);
  const std::string want = testutil::read_file(full_path);

  struct InjectedCrash : std::runtime_error {
    InjectedCrash() : std::runtime_error("injected crash") {}
  };

  PipelineConfig crash_config = test_config();
  crash_config.ledger_dir = (dir.path() / "ledger_crash").string();

  // Kill after doc 1 of 3.
  {
    std::shared_ptr<ScriptedBackend> b;
    Gateway g = scripted_gateway(b);
    RunOptions options;
    options.hooks.after_document = [](const Document&, std::size_t index) {
      if (index == 0) throw InjectedCrash();
    };
    CHECK_THROWS_AS(run_pipeline(corpus, crash_config, g, options), InjectedCrash);
  }

  // Resume processes docs 2-3 only and leaves doc 1 untouched.
  {
    std::shared_ptr<ScriptedBackend> b;
    Gateway g = scripted_gateway(b);
    RunOptions options;
    options.resume = true;
    RunResult resumed = run_pipeline(corpus, crash_config, g, options);
    bool saw_doc0 = false;
    for (const auto& call : b->transcript()) {
      saw_doc0 |= call.user.find(corpus.documents[0].text) != std::string::npos;
    }
    CHECK_FALSE(saw_doc0);

    auto resumed_path = dir.file("resumed.jsonl");
    export_dataset(resumed.dataset, ExportFormat::full_provenance, resumed_path);
    CHECK(testutil::read_file(resumed_path) == want);
  }

  // Resume of a completed run is a no-op with an identical export.
  {
    std::shared_ptr<ScriptedBackend> b;
    Gateway g = scripted_gateway(b);
    RunOptions options;
    options.resume = true;
    RunResult again = run_pipeline(corpus, crash_config, g, options);
    CHECK(b->call_count() == 0);
    auto path = dir.file("noop.jsonl");
    export_dataset(again.dataset, ExportFormat::full_provenance, path);
    CHECK(testutil::read_file(path) == want);
  }

  // Resume with a changed seed refuses on the fingerprint.
  {
    PipelineConfig changed = crash_config;
    changed.seed = 43;
    std::shared_ptr<ScriptedBackend> b;
    Gateway g = scripted_gateway(b);
    RunOptions options;
    options.resume = true;
    CHECK_THROWS_AS(run_pipeline(corpus, changed, g, options), ConfigError);

    options.force_fingerprint = true;  // explicit override proceeds
    RunResult forced = run_pipeline(corpus, changed, g, options);
    CHECK(forced.dataset.size() == uninterrupted.dataset.size());
  }
}

TEST_CASE("config fingerprint tracks semantic fields only") {
  PipelineConfig a = test_config();
  PipelineConfig b = test_config();
  CHECK(a.fingerprint() == b.fingerprint());

  b.seed = 43;
  CHECK(a.fingerprint() != b.fingerprint());

  b = test_config();
  b.levels.macro = false;
  CHECK(a.fingerprint() != b.fingerprint());

  b = test_config();
  b.workers = 16;
  b.dataset_path = "elsewhere.jsonl";
  b.ledger_dir = "other";
  CHECK(a.fingerprint() == b.fingerprint());
}

TEST_CASE("config json round trip preserves every field") {
  PipelineConfig config = test_config();
  config.levels.scatter = false;
  config.regenerate_answers = false;
  config.group_size_dist = {{2, 0.25}, {5, 0.75}};
  config.prompt_dir = "prompts";
  config.workers = 3;

  PipelineConfig loaded = PipelineConfig::from_json(config.to_json());
  CHECK(loaded.fingerprint() == config.fingerprint());
  CHECK(loaded.workers == 3);
  CHECK(loaded.group_size_dist == config.group_size_dist);
  CHECK(loaded.levels.scatter == false);
}

TEST_CASE("config validation rejects broken setups") {
  PipelineConfig config = test_config();
  config.levels = LevelFlags{false, false, false};
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = test_config();
  config.group_size_dist = {{2, 0.5}};
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = test_config();
  config.backend.kind = "telepathy";
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
