// Command-line front end: synthetic data generation, training, evaluation,
// checkpoint inspection, and metrics reporting.
//
// Every option can also be supplied through a flat key=value config file
// (--config FILE); explicit command-line flags override file values, and each
// file-producing run writes its resolved configuration next to its outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dal/data.hpp"
#include "dal/eval.hpp"
#include "dal/trainer.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

dal::Mode parse_mode(const std::string& s) {
  if (s == "joint") return dal::Mode::joint;
  if (s == "I_only") return dal::Mode::I_only;
  if (s == "C_only") return dal::Mode::C_only;
  dal::raise(dal::ErrorCode::ConfigInvalid,
             "mode must be joint, I_only, or C_only (got '" + s + "')");
}

dal::Precision parse_precision(const std::string& s) {
  if (s == "f32") return dal::Precision::f32;
  if (s == "f64") return dal::Precision::f64;
  dal::raise(dal::ErrorCode::ConfigInvalid,
             "precision must be f32 or f64 (got '" + s + "')");
}

dal::HeadKind parse_head(const std::string& s) {
  if (s == "identity") return dal::HeadKind::Identity;
  if (s == "linear") return dal::HeadKind::Linear;
  if (s == "one_hidden") return dal::HeadKind::OneHidden;
  dal::raise(dal::ErrorCode::ConfigInvalid,
             "head must be identity, linear, or one_hidden (got '" + s + "')");
}

dal::HeadInit parse_init(const std::string& s) {
  if (s == "uniform") return dal::HeadInit::uniform;
  if (s == "near_identity") return dal::HeadInit::near_identity;
  dal::raise(dal::ErrorCode::ConfigInvalid,
             "init must be uniform or near_identity (got '" + s + "')");
}

const char* head_name(dal::HeadKind k) {
  switch (k) {
    case dal::HeadKind::Identity: return "identity";
    case dal::HeadKind::Linear: return "linear";
    case dal::HeadKind::OneHidden: return "one_hidden";
  }
  return "?";
}

void write_resolved_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    dal::raise(dal::ErrorCode::IoFailure, "cannot open " + path + " for writing");
  }
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
}

// Expand `--config FILE` into `--key=value` tokens inserted directly after
// the subcommand name, so explicit command-line flags (which come later and
// take-last precedence) override file values.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  std::string config_path;
  std::size_t insert_at = args.empty() ? 0 : 1;  // right after the subcommand
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) {
    dal::raise(dal::ErrorCode::ConfigInvalid, "cannot read config file " + config_path);
  }
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      dal::raise(dal::ErrorCode::ConfigInvalid,
                 config_path + " line " + std::to_string(line_no) +
                     " is not key=value");
    }
    if (eq + 1 == line.size()) continue;  // empty value = keep the default
    tokens.push_back("--" + line.substr(0, eq) + "=" + line.substr(eq + 1));
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), tokens.begin(),
              tokens.end());
  return args;
}

// Later occurrences win, which makes explicit flags override config values.
void take_last(CLI::App& cmd) {
  for (CLI::Option* opt : cmd.get_options()) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  dal::SyntheticConfig cfg;
  std::string out_features;
  std::string out_manifest;
};

void setup_generate(CLI::App& cmd, GenerateArgs& a) {
  cmd.add_option("--out_features", a.out_features, "output feature file")->required();
  cmd.add_option("--out_manifest", a.out_manifest, "output manifest CSV")->required();
  cmd.add_option("--identities", a.cfg.identities, "number of identities");
  cmd.add_option("--cameras", a.cfg.cameras, "number of cameras");
  cmd.add_option("--frames_min", a.cfg.frames_min, "minimum frames per tracklet");
  cmd.add_option("--frames_max", a.cfg.frames_max, "maximum frames per tracklet");
  cmd.add_option("--dim", a.cfg.dim, "feature dimension");
  cmd.add_option("--distortion", a.cfg.distortion, "per-camera linear distortion scale");
  cmd.add_option("--noise", a.cfg.noise, "per-coordinate frame noise");
  cmd.add_option("--min_separation", a.cfg.min_separation,
                 "minimum pairwise prototype angle (radians)");
  cmd.add_option("--seed", a.cfg.seed, "generation seed");
}

int run_generate(const GenerateArgs& a) {
  const dal::Dataset ds = dal::generate_synthetic(a.cfg);
  dal::save_dataset(a.out_features, a.out_manifest, ds);
  write_resolved_config(
      a.out_features + ".config",
      {{"out_features", a.out_features},
       {"out_manifest", a.out_manifest},
       {"identities", std::to_string(a.cfg.identities)},
       {"cameras", std::to_string(a.cfg.cameras)},
       {"frames_min", std::to_string(a.cfg.frames_min)},
       {"frames_max", std::to_string(a.cfg.frames_max)},
       {"dim", std::to_string(a.cfg.dim)},
       {"distortion", fmt(a.cfg.distortion)},
       {"noise", fmt(a.cfg.noise)},
       {"min_separation", fmt(a.cfg.min_separation)},
       {"seed", std::to_string(a.cfg.seed)}});
  std::cout << "wrote " << ds.frames.size() << " frames, " << ds.total_tracklets()
            << " tracklets, " << ds.cameras << " cameras to " << a.out_features
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string features;
  std::string manifest;
  std::string out_dir;
  std::string resume_from;
  dal::TrainOptions opt;
  std::string mode = "joint";
  std::string precision = "f32";
  std::string head = "linear";
  std::string init = "near_identity";
};

void setup_train(CLI::App& cmd, TrainArgs& a) {
  cmd.add_option("--features", a.features, "input feature file")->required();
  cmd.add_option("--manifest", a.manifest, "input manifest CSV")->required();
  cmd.add_option("--out_dir", a.out_dir,
                 "output directory for checkpoint.dalc, metrics.csv, resolved.config")
      ->required();
  cmd.add_option("--margin", a.opt.margin, "hinge margin");
  cmd.add_option("--lambda", a.opt.lambda, "cross-camera loss weight");
  cmd.add_option("--eta", a.opt.eta, "anchor moving-average rate");
  cmd.add_option("--batch", a.opt.batch, "frames per mini-batch");
  cmd.add_option("--max_iter", a.opt.max_iter, "training iterations");
  cmd.add_option("--halt", a.opt.halt_iteration,
                 "stop early at this iteration, leaving a resumable checkpoint");
  cmd.add_option("--cadence", a.opt.cadence, "iterations between metric rows");
  cmd.add_option("--seed", a.opt.seed, "training seed");
  cmd.add_option("--mode", a.mode, "objective: joint, I_only, or C_only");
  cmd.add_option("--precision", a.precision, "training distance arithmetic: f32 or f64");
  cmd.add_option("--head", a.head, "embedding head: identity, linear, or one_hidden");
  cmd.add_option("--init", a.init, "head initialization: uniform or near_identity");
  cmd.add_option("--d_out", a.opt.d_out, "embedding dimension (0 = input dimension)");
  cmd.add_option("--hidden", a.opt.hidden, "hidden width for one_hidden");
  cmd.add_option("--learning_rate", a.opt.learning_rate, "initial learning rate");
  cmd.add_option("--decay_factor", a.opt.decay_factor, "stepwise rate multiplier");
  cmd.add_option("--decay_interval", a.opt.decay_interval,
                 "iterations between rate decays (0 = max_iter/2)");
  cmd.add_option("--momentum", a.opt.momentum, "SGD momentum");
  cmd.add_flag("--balanced", a.opt.balanced_sampling,
               "draw one frame per tracklet per round instead of uniformly");
  cmd.add_option("--resume", a.resume_from,
                 "continue from this checkpoint instead of initializing");
}

int run_train(TrainArgs a) {
  a.opt.mode = parse_mode(a.mode);
  a.opt.precision = parse_precision(a.precision);
  a.opt.head_kind = parse_head(a.head);
  a.opt.head_init = parse_init(a.init);

  const dal::Dataset ds = dal::load_features(a.features, a.manifest);
  const dal::TrainResult result =
      a.resume_from.empty()
          ? dal::train(ds, a.opt)
          : dal::resume(ds, dal::load_checkpoint(a.resume_from), a.opt);

  fs::create_directories(a.out_dir);
  const std::string checkpoint_path = (fs::path(a.out_dir) / "checkpoint.dalc").string();
  const std::string metrics_path = (fs::path(a.out_dir) / "metrics.csv").string();
  dal::save_checkpoint(checkpoint_path, result.checkpoint);
  dal::write_metrics_csv(metrics_path, result.metrics);
  write_resolved_config(
      (fs::path(a.out_dir) / "resolved.config").string(),
      {{"features", a.features},
       {"manifest", a.manifest},
       {"out_dir", a.out_dir},
       {"margin", fmt(a.opt.margin)},
       {"lambda", fmt(a.opt.lambda)},
       {"eta", fmt(a.opt.eta)},
       {"batch", std::to_string(a.opt.batch)},
       {"max_iter", std::to_string(a.opt.max_iter)},
       {"halt", std::to_string(a.opt.halt_iteration)},
       {"cadence", std::to_string(a.opt.cadence)},
       {"seed", std::to_string(a.opt.seed)},
       {"mode", a.mode},
       {"precision", a.precision},
       {"head", a.head},
       {"init", a.init},
       {"d_out", std::to_string(a.opt.d_out)},
       {"hidden", std::to_string(a.opt.hidden)},
       {"learning_rate", fmt(a.opt.learning_rate)},
       {"decay_factor", fmt(a.opt.decay_factor)},
       {"decay_interval", std::to_string(a.opt.decay_interval)},
       {"momentum", fmt(a.opt.momentum)},
       {"balanced", a.opt.balanced_sampling ? "true" : "false"},
       {"resume", a.resume_from}});

  const dal::MetricsRow& last = result.metrics.back();
  std::cout << "iteration " << result.checkpoint.iteration << "\nloss_total "
            << fmt(last.loss_total) << "\nassoc_rate " << fmt(last.assoc_rate)
            << "\ntrue_match_rate " << fmt(last.true_match_rate) << "\ncheckpoint "
            << checkpoint_path << "\nmetrics " << metrics_path << "\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string features;
  std::string manifest;
  std::string out;
};

void setup_eval(CLI::App& cmd, EvalArgs& a) {
  cmd.add_option("--checkpoint", a.checkpoint, "trained checkpoint")->required();
  cmd.add_option("--features", a.features, "input feature file")->required();
  cmd.add_option("--manifest", a.manifest, "labeled manifest CSV")->required();
  cmd.add_option("--out", a.out, "also write the report as CSV here");
}

int run_eval(const EvalArgs& a) {
  const dal::Checkpoint cp = dal::load_checkpoint(a.checkpoint);
  const dal::Dataset ds = dal::load_features(a.features, a.manifest);
  if (cp.head.d_in != ds.dim) {
    dal::raise(dal::ErrorCode::DimensionMismatch,
               "checkpoint expects inputs of dimension " + std::to_string(cp.head.d_in) +
                   ", dataset has " + std::to_string(ds.dim));
  }
  const dal::EvalReport report = dal::evaluate(ds, cp.head, &cp.bank, cp.iteration);

  auto cmc_at = [&](std::size_t rank1based) {
    const std::size_t i = std::min(rank1based, report.cmc.size()) - 1;
    return report.cmc[i];
  };
  const double tmr = report.true_match_rate
                         ? *report.true_match_rate
                         : std::numeric_limits<double>::quiet_NaN();
  std::cout << "iteration " << report.iteration << "\ncmc1 " << fmt(cmc_at(1))
            << "\ncmc5 " << fmt(cmc_at(5)) << "\nmap " << fmt(report.map)
            << "\nassoc_rate " << fmt(report.association_rate) << "\ntrue_match_rate "
            << fmt(tmr) << "\n";

  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!out) {
      dal::raise(dal::ErrorCode::IoFailure, "cannot open " + a.out + " for writing");
    }
    out << "iter,cmc1,cmc5,map,assoc_rate,true_match_rate\n"
        << report.iteration << ',' << fmt(cmc_at(1)) << ',' << fmt(cmc_at(5)) << ','
        << fmt(report.map) << ',' << fmt(report.association_rate) << ',' << fmt(tmr)
        << '\n';
    write_resolved_config(a.out + ".config", {{"checkpoint", a.checkpoint},
                                              {"features", a.features},
                                              {"manifest", a.manifest},
                                              {"out", a.out}});
  }
  return 0;
}

// ----------------------------------------------------------------- inspect

int run_inspect(const std::string& path) {
  const dal::Checkpoint cp = dal::load_checkpoint(path);
  double param_norm = 0.0;
  for (double p : cp.head.params) param_norm += p * p;
  param_norm = std::sqrt(param_norm);

  std::cout << "iteration " << cp.iteration << "\nhead " << head_name(cp.head.kind)
            << " " << cp.head.d_in << "->" << cp.head.d_out << " params "
            << cp.head.param_count() << "\nparam_norm " << fmt(param_norm)
            << "\ncameras " << cp.bank.n_cameras() << "\n";
  std::size_t merged_total = 0;
  for (std::size_t k = 0; k < cp.bank.n_cameras(); ++k) {
    std::size_t merged = 0;
    for (const auto& m : cp.bank.merge[k]) merged += m.merged ? 1 : 0;
    merged_total += merged;
    std::cout << "camera " << k << ": anchors " << cp.bank.n_anchors(k) << ", merged "
              << merged << "\n";
  }
  std::cout << "merged " << merged_total << " of " << cp.bank.total_anchors() << "\n";
  return 0;
}

// ------------------------------------------------------------------ report

int run_report(const std::string& metrics_path, const std::string& out_path) {
  const std::vector<dal::MetricsRow> rows = dal::read_metrics_csv(metrics_path);
  std::ostringstream body;
  body << "iter,assoc_rate,true_match_rate\n";
  for (const auto& r : rows) {
    body << r.iter << ',' << fmt(r.assoc_rate) << ',' << fmt(r.true_match_rate) << '\n';
  }
  if (out_path.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      dal::raise(dal::ErrorCode::IoFailure, "cannot open " + out_path + " for writing");
    }
    out << body.str();
    write_resolved_config(out_path + ".config",
                          {{"metrics", metrics_path}, {"out", out_path}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised cross-camera tracklet embedding trainer"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_generate =
      app.add_subcommand("generate", "write a synthetic multi-camera dataset");
  setup_generate(*cmd_generate, gen);

  TrainArgs tr;
  CLI::App* cmd_train = app.add_subcommand("train", "train an embedding head");
  setup_train(*cmd_train, tr);

  EvalArgs ev;
  CLI::App* cmd_eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  setup_eval(*cmd_eval, ev);

  std::string inspect_path;
  CLI::App* cmd_inspect =
      app.add_subcommand("inspect", "summarize a checkpoint's contents");
  cmd_inspect->add_option("--checkpoint", inspect_path, "checkpoint file")->required();

  std::string report_metrics, report_out;
  CLI::App* cmd_report = app.add_subcommand(
      "report", "extract per-iteration association curves from a metrics CSV");
  cmd_report->add_option("--metrics", report_metrics, "metrics CSV from train")
      ->required();
  cmd_report->add_option("--out", report_out, "output CSV (stdout when omitted)");

  std::string config_path;
  for (CLI::App* sub : {cmd_generate, cmd_train, cmd_eval, cmd_inspect, cmd_report}) {
    sub->add_option("--config", config_path,
                    "flat key=value config file; explicit flags override it");
    take_last(*sub);
  }

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (cmd_generate->parsed()) return run_generate(gen);
    if (cmd_train->parsed()) return run_train(tr);
    if (cmd_eval->parsed()) return run_eval(ev);
    if (cmd_inspect->parsed()) return run_inspect(inspect_path);
    if (cmd_report->parsed()) return run_report(report_metrics, report_out);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: ConfigInvalid: " << e.what() << "\n";
    return 1;
  } catch (const dal::DalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: IoFailure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
