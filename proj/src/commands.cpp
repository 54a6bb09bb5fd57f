#include "mcls/commands.hpp"

#include <fstream>
#include <sstream>

#include "mcls/report.hpp"
#include "mcls/synthetic.hpp"

namespace mcls {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o, std::vector<std::string>& diagnostics) {
  auto& g = cfg.grid;
  if (o.out) cfg.output_dir = *o.out;
  if (o.workers) g.workers = *o.workers;
  if (o.seed) g.base_seed = *o.seed;
  if (o.folds) g.folds = *o.folds;
  if (o.replications) g.replications = *o.replications;
  auto guarded = [&](const char* flag, auto&& apply) {
    try {
      apply();
    } catch (const Error& e) {
      diagnostics.push_back(std::string(flag) + ": " + e.what());
    }
  };
  if (o.members) {
    guarded("--members", [&] {
      g.member_sets = parse_member_sets(*o.members);
      for (const auto& m : g.member_sets) {
        EnsembleSpec spec;
        spec.members = m;
        spec.validate();
      }
    });
  }
  if (o.architectures) {
    guarded("--arch", [&] {
      g.architectures.clear();
      if (*o.architectures == "all") {
        g.architectures.assign(kAllArchitectures.begin(), kAllArchitectures.end());
        return;
      }
      std::istringstream in(*o.architectures);
      for (std::string name; std::getline(in, name, ',');) g.architectures.push_back(parse_architecture(name));
    });
  }
  if (o.resamplings) {
    guarded("--resampling", [&] {
      g.resamplings.clear();
      if (*o.resamplings == "all") {
        g.resamplings.assign(kAllResamplingKinds.begin(), kAllResamplingKinds.end());
        return;
      }
      std::istringstream in(*o.resamplings);
      for (std::string name; std::getline(in, name, ',');) g.resamplings.push_back(parse_resampling_kind(name));
    });
  }
  guarded("overrides", [&] { g.validate(); });
}

struct LoadedConfig {
  ExperimentConfig config;
  std::string text;
};

// Parses, overrides and checks a config; prints diagnostics and returns nullopt on any problem.
std::optional<LoadedConfig> prepare(const std::filesystem::path& path, const ConfigOverrides& overrides,
                                    const CommandContext& ctx) {
  std::vector<std::string> diagnostics;
  LoadedConfig loaded;
  try {
    loaded.text = read_text(path);
  } catch (const Error& e) {
    ctx.err << "config: " << e.what() << '\n';
    return std::nullopt;
  }
  loaded.config = config_from_text(loaded.text, path.parent_path(), diagnostics);
  apply_overrides(loaded.config, overrides, diagnostics);
  if (diagnostics.empty()) {
    const auto more = check_config_inputs(loaded.config);
    diagnostics.insert(diagnostics.end(), more.begin(), more.end());
  }
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) ctx.err << d << '\n';
    return std::nullopt;
  }
  return loaded;
}

std::string level_of(const std::vector<GroupSummary>& groups) { return groups.empty() ? "" : groups.front().key[0]; }

// Refits the best system of each family on a fresh train/validation split of the full data.
void save_best_models(const Dataset& ds, const ExperimentConfig& cfg, const std::vector<ExperimentCell>& cells,
                      const CommandContext& ctx) {
  const auto& g = cfg.grid;
  const auto dir = cfg.output_dir / "models";
  std::filesystem::create_directories(dir);
  SplitSpec split = g.split;
  split.seed = derive_seed(g.base_seed, {hash_string("final")});
  const auto parts = split_train_val_test(ds, split);
  const HyperParams params = with_smoothing(g.params, g.smoothing);

  std::vector<ExperimentCell> singles;
  std::copy_if(cells.begin(), cells.end(), std::back_inserter(singles),
               [](const ExperimentCell& c) { return c.architecture == "single"; });
  const auto best_single = level_of(summarize(singles, [](const ExperimentCell& c) { return std::vector<std::string>{c.members}; }));
  if (!best_single.empty()) {
    auto model = train_member(parse_classifier_kind(best_single), parts.train, parts.validation, params);
    save_model(*model, dir / "best_single.json");
    ctx.emit(LogLevel::info, "saved best single classifier " + best_single);
  }
  for (auto architecture : g.architectures) {
    const std::string name(to_string(architecture));
    std::vector<ExperimentCell> family;
    std::copy_if(cells.begin(), cells.end(), std::back_inserter(family),
                 [&](const ExperimentCell& c) { return c.architecture == name; });
    const auto best = summarize(family, [](const ExperimentCell& c) { return std::vector<std::string>{c.members, c.resampling}; });
    if (best.empty()) continue;
    EnsembleSpec spec;
    spec.members = parse_member_set(best.front().key[0]);
    spec.architecture = architecture;
    spec.resampling = g.resampling;
    spec.resampling.kind = parse_resampling_kind(best.front().key[1]);
    spec.rule = g.rule;
    spec.locality_k = g.locality_k;
    try {
      auto model = train_ensemble(spec, parts.train, parts.validation, params, derive_seed(split.seed, {1}));
      save_model(*model, dir / ("best_" + name + ".json"));
      ctx.emit(LogLevel::info, "saved best " + name + " ensemble " + best.front().key[0] + " / " + best.front().key[1]);
    } catch (const Error& e) {
      ctx.emit(LogLevel::warn, "could not refit best " + name + " ensemble: " + e.what());
    }
  }
}

}  // namespace

int cmd_validate(const std::filesystem::path& config, const CommandContext& ctx) {
  if (!prepare(config, {}, ctx)) return kExitInputError;
  ctx.out << "OK\n";
  return kExitOk;
}

int cmd_grid(const std::filesystem::path& config, const ConfigOverrides& overrides, const CommandContext& ctx) {
  const auto loaded = prepare(config, overrides, ctx);
  if (!loaded) return kExitInputError;
  const auto& cfg = loaded->config;
  try {
    const Dataset ds = load_dataset(cfg.dataset, cfg.schema);
    ctx.emit(LogLevel::info, "dataset " + cfg.dataset.string() + ": " + std::to_string(ds.size()) + " rows, " +
                                 std::to_string(ds.feature_count()) + " features");
    const auto cells = run_grid(ds, cfg.grid, [&](const ExperimentCell& c, std::size_t done, std::size_t total) {
      if (!c.ok()) {
        ctx.emit(LogLevel::warn, c.members + " / " + c.architecture + " / " + c.resampling + " fold " +
                                     std::to_string(c.fold) + ": " + c.status);
      }
      ctx.emit(LogLevel::debug, "cell " + std::to_string(done) + "/" + std::to_string(total) + " done");
      if (done % 100 == 0 || done == total) {
        ctx.emit(LogLevel::info, std::to_string(done) + "/" + std::to_string(total) + " cells done");
      }
    });
    std::filesystem::create_directories(cfg.output_dir);
    write_results_csv(cells, cfg.output_dir / "results.csv");
    std::ofstream manifest(cfg.output_dir / "manifest.json");
    manifest << grid_manifest(cfg, loaded->text, cells).dump(2) << '\n';
    if (overrides.save_models) save_best_models(ds, cfg, cells, ctx);

    const auto failed = std::count_if(cells.begin(), cells.end(), [](const ExperimentCell& c) { return !c.ok(); });
    ctx.out << cells.size() << " cells written to " << (cfg.output_dir / "results.csv").string() << " (" << failed
            << " failed)\n";
    return failed > 0 ? kExitCellFailures : kExitOk;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_rank(const std::filesystem::path& config, const ConfigOverrides& overrides, const CommandContext& ctx) {
  const auto loaded = prepare(config, overrides, ctx);
  if (!loaded) return kExitInputError;
  const auto& cfg = loaded->config;
  try {
    const Dataset ds = load_dataset(cfg.dataset, cfg.schema);
    const auto folds = make_folds(ds, cfg.grid.folds, derive_seed(cfg.grid.base_seed, {hash_string("rank")}),
                                  cfg.grid.split.stratified);
    RankingOptions options;
    options.smoothing = cfg.grid.smoothing;
    const auto ranking = rank_features(ds, folds, options);
    std::filesystem::create_directories(cfg.output_dir);
    write_ranking_csv(ranking, cfg.output_dir / "ranking.csv");
    ctx.out << ranking_table(ranking);
    return kExitOk;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_report(const std::filesystem::path& results, const std::optional<std::filesystem::path>& out_dir,
               const CommandContext& ctx) {
  try {
    const auto cells = read_results_csv(results);
    std::optional<FeatureRanking> ranking;
    const auto ranking_path = results.parent_path() / "ranking.csv";
    if (std::filesystem::exists(ranking_path)) ranking = read_ranking_csv(ranking_path);
    const auto dir = out_dir.value_or(results.parent_path() / "report");
    ctx.out << write_report(cells, dir, ranking);
    ctx.emit(LogLevel::info, "report written to " + dir.string());
    return kExitOk;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& dataset,
                const std::optional<std::filesystem::path>& schema, const std::optional<std::filesystem::path>& out,
                const CommandContext& ctx) {
  try {
    const auto model = load_model(model_path);
    DatasetSchema data_schema{model->features(), "label"};
    if (schema) {
      data_schema = load_schema(*schema);
      const auto& expected = model->features();
      const auto& given = data_schema.features;
      for (std::size_t j = 0; j < std::max(expected.size(), given.size()); ++j) {
        if (j >= given.size()) throw Error("schema mismatch: feature '" + expected[j].name + "' is missing");
        if (j >= expected.size()) throw Error("schema mismatch: unexpected feature '" + given[j].name + "'");
        if (!(expected[j] == given[j])) throw Error("schema mismatch: feature '" + given[j].name + "' differs from the model's '" + expected[j].name + "'");
      }
    }
    const Dataset ds = load_dataset(dataset, data_schema,
                                    LoadOptions{.require_label = false, .allow_empty = true, .ignore_extra_columns = !schema});
    const auto* ensemble = dynamic_cast<const EnsembleModel*>(model.get());
    const bool selects = ensemble && ensemble->spec().architecture == Architecture::dynamic_selection;

    std::ostringstream text;
    text << "row,predicted,p0,p1" << (selects ? ",selected_member" : "") << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (selects) {
        const auto p = ensemble->predict_detailed(ds[i]);
        text << i << ',' << p.distribution.argmax() << ',' << format_double(p.distribution.p[0]) << ','
             << format_double(p.distribution.p[1]) << ','
             << to_string(ensemble->spec().members[static_cast<std::size_t>(p.selected_member)]) << '\n';
      } else {
        const auto p = model->predict_proba(ds[i]);
        text << i << ',' << p.argmax() << ',' << format_double(p.p[0]) << ',' << format_double(p.p[1]) << '\n';
      }
    }
    if (out) {
      std::ofstream file(*out);
      if (!file) throw Error("cannot write '" + out->string() + "'");
      file << text.str();
    } else {
      ctx.out << text.str();
    }
    return kExitOk;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_synth(const std::filesystem::path& out_dir, std::size_t rows, std::uint64_t seed, const CommandContext& ctx) {
  try {
    std::filesystem::create_directories(out_dir);
    const auto ds = make_behavioural_dataset(rows, seed);
    save_dataset(ds, out_dir / "synthetic.csv", out_dir / "synthetic.schema.json");
    const auto counts = ds.class_counts();
    ctx.out << "wrote " << ds.size() << " rows (" << counts[0] << " class 0, " << counts[1] << " class 1) to "
            << (out_dir / "synthetic.csv").string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace mcls
