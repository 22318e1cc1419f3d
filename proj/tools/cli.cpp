#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "bmdl/atomic_file.hpp"
#include "bmdl/chain.hpp"
#include "bmdl/error.hpp"
#include "bmdl/eval.hpp"
#include "bmdl/features.hpp"
#include "bmdl/io.hpp"
#include "bmdl/serialize.hpp"
#include "bmdl/synth.hpp"

namespace bmdl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string out_dir = "bmdl_out";
  std::uint64_t seed = 1;
};

void add_hyperparameters(CLI::App* sub, Hyperparameters& hp) {
  sub->add_option("--K", hp.K, "Truncation level")->capture_default_str();
  sub->add_option("--a0", hp.a0)->capture_default_str();
  sub->add_option("--b0", hp.b0)->capture_default_str();
  sub->add_option("--e0", hp.e0)->capture_default_str();
  sub->add_option("--f0", hp.f0)->capture_default_str();
  sub->add_option("--h0", hp.h0)->capture_default_str();
  sub->add_option("--u0", hp.u0)->capture_default_str();
  sub->add_option("--s0", hp.s0)->capture_default_str();
  sub->add_option("--w0", hp.w0)->capture_default_str();
  sub->add_option("--t0", hp.t0)->capture_default_str();
  sub->add_option("--c-ibp", hp.c_ibp, "Beta-Bernoulli concentration")->capture_default_str();
  sub->add_option("--crt-cutoff", hp.crt_cutoff, "Exact CRT draws up to this many customers")
      ->capture_default_str();
}

void add_chain(CLI::App* sub, ChainConfig& c) {
  sub->add_option("--iterations", c.iterations, "Gibbs sweeps")->capture_default_str();
  sub->add_option("--burn-in", c.burn_in)->capture_default_str();
  sub->add_option("--thin", c.thin)->capture_default_str();
  sub->add_flag("!--no-log-joint", c.collect_log_joint, "Skip the per-iteration log joint");
  sub->add_flag("!--fix-pi", c.resample_pi, "Keep pi at its initial draw");
  sub->add_flag("!--fix-scales", c.resample_scales, "Keep c_j, c_d, c0 at their initial draws");
  sub->add_option_function<std::string>(
         "--init", [&c](const std::string& v) { c.init = parse_init_strategy(v); },
         "Starting state: dispersed or prior")
      ->check(CLI::IsMember({"dispersed", "prior"}))
      ->default_str("dispersed");
}

void add_extraction(CLI::App* sub, ExtractionConfig& e) {
  sub->add_option("--extract-iterations", e.iterations)->capture_default_str();
  sub->add_option("--collect-last", e.collect_last)->capture_default_str();
}

void add_synth(CLI::App* sub, SynthConfig& s) {
  sub->add_option("--num-features", s.num_features)->capture_default_str();
  sub->add_option("--factors-per-domain", s.factors_per_domain)->capture_default_str();
  sub->add_option("--shared-factors", s.shared_factors)->capture_default_str();
  sub->add_option("--source-samples", s.source_samples)->capture_default_str();
  sub->add_option("--target-samples", s.target_samples)->capture_default_str();
  sub->add_option("--test-samples", s.test_samples, "-1 means the target size")->capture_default_str();
  sub->add_option("--class-scale-a", s.class_scale_a)->capture_default_str();
  sub->add_option("--class-scale-scale", s.class_scale_scale)->capture_default_str();
  sub->add_option("--dirichlet-eta", s.dirichlet_eta)->capture_default_str();
  sub->add_option("--gen-gamma0", s.gamma0, "-1 means factors-per-domain")->capture_default_str();
  sub->add_option("--gen-c0", s.c0)->capture_default_str();
  sub->add_option("--gen-cd", s.c_d)->capture_default_str();
  sub->add_option("--gen-p-beta", s.p_beta)->capture_default_str();
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out_dir, "Output directory")
      ->envname(kOutputDirEnv)
      ->capture_default_str();
  sub->add_option("--seed", c.seed)->capture_default_str();
}

ModelVariant variant_from(const std::string& s) {
  try {
    return parse_variant(s);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--variant", "unknown variant '" + s + "'");
  }
}

json synth_json(const SynthConfig& s) {
  return json{{"num_features", s.num_features},
              {"factors_per_domain", s.factors_per_domain},
              {"shared_factors", s.shared_factors},
              {"source_samples", s.source_samples},
              {"target_samples", s.target_samples},
              {"test_samples", s.test_samples},
              {"class_scale_a", s.class_scale_a},
              {"class_scale_scale", s.class_scale_scale},
              {"dirichlet_eta", s.dirichlet_eta},
              {"gamma0", s.gamma0},
              {"c0", s.c0},
              {"c_d", s.c_d},
              {"p_beta", s.p_beta},
              {"seed", s.seed}};
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 1; i < args.size(); ++i) s += (i > 1 ? " " : "") + args[i];
  return s;
}

struct FitData {
  io::Assembled assembled;
  CountTensor tensor;  // restricted to the target for TARGET_ONLY
  std::size_t target = 0;
  std::vector<std::string> domain_names;
};

FitData load_fit_data(const fs::path& manifest_path, ModelVariant variant) {
  FitData f;
  f.assembled = io::assemble(io::load_manifest(manifest_path));
  if (variant == ModelVariant::TARGET_ONLY) {
    f.tensor = f.assembled.tensor.restrict_to(f.assembled.target_index);
    f.target = 0;
  } else {
    f.tensor = f.assembled.tensor;
    f.target = f.assembled.target_index;
  }
  for (const auto& d : f.tensor.domains) f.domain_names.push_back(d.name);
  return f;
}

json frozen_json(const FrozenFactors& f) {
  return json{{"phi", json_codec::encode_matrix(f.phi)},
              {"r_target", json_codec::encode_matrix(f.r_target)},
              {"hyperparameters", json_codec::encode(f.hp)},
              {"variant", std::string(to_string(f.variant))},
              {"gene_ids", f.gene_ids}};
}

FrozenFactors frozen_from_json(const json& j) {
  FrozenFactors f;
  f.phi = json_codec::decode_matrix<Eigen::MatrixXd>(j.at("phi"));
  f.r_target = json_codec::decode_matrix<Eigen::VectorXd>(j.at("r_target"));
  f.hp = json_codec::decode_hyperparameters(j.at("hyperparameters"));
  f.variant = parse_variant(j.at("variant").get<std::string>());
  f.gene_ids = j.at("gene_ids").get<std::vector<std::string>>();
  return f;
}

// Writes every artefact of a finished (or stopped) fit.
void finish_fit(const Chain& chain, const FitData& data, const fs::path& out, io::Provenance prov,
                std::ostream& log) {
  const auto summary = chain.summary();
  chain.save(out / "checkpoint.json");
  io::write_summary(out, summary, data.tensor.gene_ids, data.domain_names);
  const auto frozen = FrozenFactors::from_summary(summary, data.target, chain.hyperparameters(),
                                                  chain.variant(), data.tensor.gene_ids);
  write_atomic(out / "factors.json", frozen_json(frozen).dump() + "\n");
  prov.outputs = {"checkpoint.json", "phi_mean.tsv", "r_mean.tsv", "r_last.tsv", "z_activation.tsv",
                  "log_joint.tsv", "summary.json", "factors.json"};
  io::write_provenance(out / "provenance.json", prov);
  log << "iterations " << chain.iteration() << ", active factors per domain:";
  for (int n : summary.active_factor_count) log << ' ' << n;
  log << ", degenerate entries " << summary.degenerate_entries << '\n';
}

// Runs `chain` to its configured end, checkpointing periodically; stops early at `stop_at`.
bool drive(Chain& chain, const fs::path& out, int checkpoint_every, int stop_at) {
  while (!chain.done()) {
    chain.step();
    if (checkpoint_every > 0 && chain.iteration() % checkpoint_every == 0) chain.save(out / "checkpoint.json");
    if (stop_at > 0 && chain.iteration() >= stop_at && !chain.done()) return false;
  }
  return true;
}

// Every factor gene must be present in the samples; rows are reordered to the factor axis.
SparseCounts align_samples(const io::CountMatrix& m, const std::vector<std::string>& genes) {
  std::unordered_map<std::string, std::int32_t> pos;
  for (std::size_t v = 0; v < genes.size(); ++v) pos.emplace(genes[v], static_cast<std::int32_t>(v));
  std::vector<std::int32_t> remap(m.gene_ids.size(), -1);
  std::size_t found = 0;
  for (std::size_t v = 0; v < m.gene_ids.size(); ++v) {
    auto it = pos.find(m.gene_ids[v]);
    if (it != pos.end()) {
      remap[v] = it->second;
      ++found;
    }
  }
  if (found != genes.size())
    throw DataError("gene axis mismatch: " + std::to_string(genes.size() - found) +
                    " fitted genes are missing from the samples");
  SparseCounts out;
  out.num_genes = genes.size();
  std::vector<std::pair<std::int32_t, std::int64_t>> e;
  std::vector<std::int32_t> g;
  std::vector<std::int64_t> c;
  for (std::size_t j = 0; j < m.counts.num_samples(); ++j) {
    e.clear();
    const auto gs = m.counts.genes_of(j);
    const auto cs = m.counts.counts_of(j);
    for (std::size_t i = 0; i < gs.size(); ++i)
      if (remap[static_cast<std::size_t>(gs[i])] >= 0) e.emplace_back(remap[static_cast<std::size_t>(gs[i])], cs[i]);
    std::sort(e.begin(), e.end());
    g.clear();
    c.clear();
    for (auto [a, b] : e) {
      g.push_back(a);
      c.push_back(b);
    }
    out.push_sample(g, c);
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-domain negative binomial factor analysis"};
  app.set_config("--config", "", "Key-value config file; command-line flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", io::version());

  Common common;
  Hyperparameters hp;
  ChainConfig chain_cfg;
  ExtractionConfig extract_cfg;
  SynthConfig synth_cfg;
  std::string variant_name = "bmdl";
  std::string manifest, checkpoint, factors, counts_path, labels_path, features_out;
  std::string train_path, test_path;
  int checkpoint_every = 0, stop_at = 0, extend_to = 0, runs = 10;
  double C = 1.0;
  std::vector<int> shared_levels, target_sizes;
  std::vector<std::string> variant_names{"bmdl", "target-only"};

  auto* fit = app.add_subcommand("fit", "Fit a chain to the domains of a manifest");
  fit->add_option("--manifest", manifest, "Domain manifest (JSON)")->required()->check(CLI::ExistingFile);
  fit->add_option("--variant", variant_name)->capture_default_str();
  fit->add_option("--checkpoint-every", checkpoint_every, "Save a checkpoint every N sweeps");
  fit->add_option("--stop-at", stop_at, "Checkpoint and stop after this sweep");
  add_hyperparameters(fit, hp);
  add_chain(fit, chain_cfg);
  add_common(fit, common);

  auto* resume = app.add_subcommand("resume", "Continue a chain from its checkpoint");
  resume->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  resume->add_option("--manifest", manifest, "Overrides the manifest recorded in the checkpoint");
  resume->add_option("--iterations", extend_to, "New total number of sweeps");
  resume->add_option("--checkpoint-every", checkpoint_every);
  resume->add_option("--stop-at", stop_at);
  resume->add_option("--out", common.out_dir)->envname(kOutputDirEnv)->capture_default_str();

  auto* extract_cmd = app.add_subcommand("extract", "Posterior-mean factor scores for new samples");
  auto* src = extract_cmd->add_option_group("factors source");
  src->add_option("--checkpoint", checkpoint)->check(CLI::ExistingFile);
  src->add_option("--factors", factors, "factors.json written by fit")->check(CLI::ExistingFile);
  src->require_option(1);
  extract_cmd->add_option("--counts", counts_path, "Count matrix TSV")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--labels", labels_path)->check(CLI::ExistingFile);
  extract_cmd->add_option("--output", features_out, "Feature TSV (default OUT/features.tsv)");
  add_extraction(extract_cmd, extract_cfg);
  add_common(extract_cmd, common);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Train the linear classifier and score a test set");
  evaluate_cmd->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--test", test_path)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--C", C)->capture_default_str();
  add_common(evaluate_cmd, common);

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic multi-domain dataset");
  add_synth(simulate, synth_cfg);
  add_common(simulate, common);

  auto* sweep_cmd = app.add_subcommand("sweep", "Repeated synthetic experiments over a condition grid");
  add_synth(sweep_cmd, synth_cfg);
  add_hyperparameters(sweep_cmd, hp);
  add_chain(sweep_cmd, chain_cfg);
  add_extraction(sweep_cmd, extract_cfg);
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--shared-levels", shared_levels, "Shared-factor counts")->delimiter(',');
  sweep_cmd->add_option("--target-sizes", target_sizes, "Target training sizes")->delimiter(',');
  sweep_cmd->add_option("--variants", variant_names)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--runs", runs)->capture_default_str();
  sweep_cmd->add_option("--C", C)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << io::version() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  const fs::path out_dir(common.out_dir);
  io::Provenance prov;
  prov.command = join_args(args);
  prov.seed = common.seed;

  try {
    if (fit->parsed()) {
      const auto variant = variant_from(variant_name);
      hp.validate();
      chain_cfg.validate();
      const fs::path manifest_abs = fs::absolute(manifest);
      auto data = load_fit_data(manifest_abs, variant);
      Chain chain(data.tensor, hp, variant, chain_cfg, RandomStream(common.seed));
      const json meta{{"manifest", manifest_abs.string()},
                      {"target_index", data.target},
                      {"domains", data.domain_names},
                      {"seed", common.seed},
                      {"command", join_args(args)}};
      chain.set_metadata(meta.dump());
      prov.config_json = json{{"subcommand", "fit"},
                              {"manifest", manifest_abs.string()},
                              {"variant", std::string(to_string(variant))},
                              {"hyperparameters", json_codec::encode(hp)},
                              {"chain", json_codec::encode(chain_cfg)},
                              {"seed", common.seed}}
                             .dump();
      prov.inputs.push_back({manifest_abs.string(), hex64(data.tensor.fingerprint())});
      out << "fitting " << to_string(variant) << ": " << data.tensor.num_domains() << " domain(s), "
          << data.tensor.num_genes() << " genes, K=" << hp.K << '\n';
      std::string dropped = "gene\treason\n";
      for (const auto& d : data.assembled.dropped) dropped += d.gene + '\t' + d.reason + '\n';
      write_atomic(out_dir / "dropped_genes.tsv", dropped);
      if (!drive(chain, out_dir, checkpoint_every, stop_at)) {
        chain.save(out_dir / "checkpoint.json");
        prov.outputs = {"checkpoint.json"};
        io::write_provenance(out_dir / "provenance.json", prov);
        out << "stopped at iteration " << chain.iteration() << "; checkpoint written\n";
        return kOk;
      }
      finish_fit(chain, data, out_dir, prov, out);
      return kOk;
    }

    if (resume->parsed()) {
      const std::string text = read_file(checkpoint);
      json meta;
      try {
        meta = json::parse(text).at("metadata");
      } catch (const std::exception& e) {
        throw CheckpointError(std::string("unreadable checkpoint: ") + e.what());
      }
      const std::string mpath = manifest.empty() ? meta.value("manifest", std::string()) : manifest;
      if (mpath.empty()) throw CheckpointError("checkpoint records no manifest; pass --manifest");
      const auto variant = parse_variant(json::parse(text).at("variant").get<std::string>());
      auto data = load_fit_data(mpath, variant);
      auto chain = Chain::from_checkpoint(data.tensor, text);
      if (extend_to > 0) chain.set_iterations(extend_to);
      prov.seed = meta.value("seed", std::uint64_t{0});
      if (meta.contains("command")) prov.history.push_back(meta.at("command").get<std::string>());
      prov.config_json = json{{"subcommand", "resume"},
                              {"checkpoint", fs::absolute(checkpoint).string()},
                              {"manifest", mpath},
                              {"resumed_at", chain.iteration()},
                              {"variant", std::string(to_string(variant))},
                              {"hyperparameters", json_codec::encode(chain.hyperparameters())},
                              {"chain", json_codec::encode(chain.config())}}
                             .dump();
      prov.inputs.push_back({mpath, hex64(data.tensor.fingerprint())});
      out << "resuming at iteration " << chain.iteration() << " of " << chain.config().iterations << '\n';
      if (!drive(chain, out_dir, checkpoint_every, stop_at)) {
        chain.save(out_dir / "checkpoint.json");
        out << "stopped at iteration " << chain.iteration() << "; checkpoint written\n";
        return kOk;
      }
      finish_fit(chain, data, out_dir, prov, out);
      return kOk;
    }

    if (extract_cmd->parsed()) {
      FrozenFactors frozen;
      if (!factors.empty()) {
        try {
          frozen = frozen_from_json(json::parse(read_file(factors)));
        } catch (const json::exception& e) {
          throw DataError(std::string("malformed factors file: ") + e.what());
        }
      } else {
        const std::string text = read_file(checkpoint);
        json meta;
        try {
          meta = json::parse(text).at("metadata");
        } catch (const std::exception& e) {
          throw CheckpointError(std::string("unreadable checkpoint: ") + e.what());
        }
        const auto variant = parse_variant(json::parse(text).at("variant").get<std::string>());
        auto data = load_fit_data(meta.at("manifest").get<std::string>(), variant);
        const auto chain = Chain::from_checkpoint(data.tensor, text);
        frozen = FrozenFactors::from_summary(chain.summary(), data.target, chain.hyperparameters(),
                                             variant, data.tensor.gene_ids);
      }
      extract_cfg.validate();
      const auto matrix = io::load_count_matrix(counts_path);
      DomainData dom;
      dom.name = "samples";
      dom.sample_ids = matrix.sample_ids;
      dom.counts = align_samples(matrix, frozen.gene_ids);
      if (!labels_path.empty()) {
        const auto labels = io::load_labels(labels_path);
        std::vector<int> l;
        for (const auto& id : dom.sample_ids) {
          auto it = labels.find(id);
          if (it == labels.end()) throw DataError("no label for sample " + id);
          l.push_back(it->second);
        }
        dom.labels = l;
      }
      const auto fm = extract(dom, frozen.gene_ids, frozen, extract_cfg, RandomStream(common.seed));
      const fs::path target = features_out.empty() ? out_dir / "features.tsv" : fs::path(features_out);
      io::write_features(target, fm);
      prov.config_json = json{{"subcommand", "extract"},
                              {"source", factors.empty() ? fs::absolute(checkpoint).string()
                                                         : fs::absolute(factors).string()},
                              {"counts", fs::absolute(counts_path).string()},
                              {"labels", labels_path.empty() ? "" : fs::absolute(labels_path).string()},
                              {"iterations", extract_cfg.iterations},
                              {"collect_last", extract_cfg.collect_last},
                              {"seed", common.seed}}
                             .dump();
      prov.outputs = {target.filename().string()};
      fs::path prov_path = target;
      prov_path += ".provenance.json";
      io::write_provenance(prov_path, prov);
      out << "wrote " << fm.num_samples() << " x " << fm.num_factors() << " features to " << target.string()
          << '\n';
      return kOk;
    }

    if (evaluate_cmd->parsed()) {
      const auto train = io::load_features(train_path);
      const auto test = io::load_features(test_path);
      const auto model = train_linear(train, C);
      ExperimentReport rep;
      rep.condition = "evaluate";
      rep.runs.push_back({0, common.seed, evaluate(model, test)});
      rep.summarize();
      prov.config_json = json{{"subcommand", "evaluate"},
                              {"train", fs::absolute(train_path).string()},
                              {"test", fs::absolute(test_path).string()},
                              {"C", C}}
                             .dump();
      rep.fingerprint = prov.config_json;
      write_atomic(out_dir / "report.csv", report_rows_csv({rep}));
      write_atomic(out_dir / "summary.csv", report_summary_csv({rep}));
      prov.outputs = {"report.csv", "summary.csv"};
      io::write_provenance(out_dir / "provenance.json", prov);
      out << "accuracy " << rep.mean << '\n';
      return kOk;
    }

    if (simulate->parsed()) {
      synth_cfg.seed = common.seed;
      const auto data = generate(synth_cfg);
      io::write_synth_dataset(out_dir, data);
      prov.config_json = json{{"subcommand", "simulate"}, {"synth", synth_json(synth_cfg)}}.dump();
      prov.outputs = {"manifest.json", "truth.json"};
      for (const auto& d : data.tensor.domains) prov.outputs.push_back(d.name + ".tsv");
      prov.outputs.push_back(data.test.name + ".tsv");
      io::write_provenance(out_dir / "provenance.json", prov);
      out << "wrote dataset to " << out_dir.string() << '\n';
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      SweepSpec spec;
      spec.base.data = synth_cfg;
      spec.base.hp = hp;
      spec.base.chain = chain_cfg;
      spec.base.extraction = extract_cfg;
      spec.base.C = C;
      spec.base.runs = runs;
      spec.base.seed = common.seed;
      spec.base.variants.clear();
      for (const auto& v : variant_names) spec.base.variants.push_back(variant_from(v));
      spec.shared_levels = shared_levels;
      spec.target_sizes = target_sizes;
      hp.validate();
      chain_cfg.validate();
      extract_cfg.validate();
      const auto reports = run_sweep(spec);
      write_atomic(out_dir / "report.csv", report_rows_csv(reports));
      write_atomic(out_dir / "summary.csv", report_summary_csv(reports));
      json vnames = json::array();
      for (auto v : spec.base.variants) vnames.push_back(std::string(to_string(v)));
      prov.config_json = json{{"subcommand", "sweep"},
                              {"synth", synth_json(synth_cfg)},
                              {"hyperparameters", json_codec::encode(hp)},
                              {"chain", json_codec::encode(chain_cfg)},
                              {"extraction", {{"iterations", extract_cfg.iterations},
                                              {"collect_last", extract_cfg.collect_last}}},
                              {"shared_levels", shared_levels},
                              {"target_sizes", target_sizes},
                              {"variants", vnames},
                              {"runs", runs},
                              {"C", C},
                              {"seed", common.seed}}
                             .dump();
      prov.outputs = {"report.csv", "summary.csv"};
      io::write_provenance(out_dir / "provenance.json", prov);
      for (const auto& r : reports)
        out << r.condition << '\t' << to_string(r.variant) << "\tmean " << r.mean << "\tstd " << r.std << '\n';
      return kOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    err << "error: invalid parameter: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace bmdl::cli
