/*
 * Copyright 2026 The KAN-MCP Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kanmcp/checkpoint.hpp"
#include "kanmcp/config.hpp"
#include "kanmcp/data.hpp"
#include "kanmcp/format.hpp"
#include "kanmcp/metrics.hpp"
#include "kanmcp/model.hpp"
#include "kanmcp/viz.hpp"

namespace kanmcp::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UsageError: return 2;
    case ErrorKind::ConfigError:
    case ErrorKind::BadSpec: return 3;
    case ErrorKind::MissingFile:
    case ErrorKind::RowCountMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::LabelOutOfRange:
    case ErrorKind::EmptyDataset:
    case ErrorKind::NoNonzeroLabels:
    case ErrorKind::ShapeMismatch: return 4;
    case ErrorKind::CorruptCheckpoint: return 5;
    case ErrorKind::IoError: return 6;
    default: return 1;
  }
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::IoError, "cannot create directory '" + dir.string() + "'");
}

std::string wall_clock() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string report_lines(const model::EvalReport& r, const std::string& prefix) {
  std::string out = metrics::to_key_value(r.metrics, prefix);
  for (Modality m : kModalities) {
    out += prefix + ".mae_" + std::string(tag(m)) + "=" + format_real(r.unimodal_mae[index_of(m)]) + "\n";
  }
  return out;
}

ordered_json report_json(const model::EvalReport& r) {
  ordered_json j;
  j["acc7"] = r.metrics.acc7;
  j["acc5"] = r.metrics.acc5;
  j["acc3"] = r.metrics.acc3;
  j["acc2"] = r.metrics.acc2;
  j["f1"] = r.metrics.f1;
  j["mae"] = r.metrics.mae;
  j["corr"] = r.metrics.corr;
  j["corr_defined"] = r.metrics.corr_defined;
  for (Modality m : kModalities) j["mae_" + std::string(tag(m))] = r.unimodal_mae[index_of(m)];
  return j;
}

data::SplitDataset load_standardized(const fs::path& dir, const data::Standardizer& s) {
  data::SplitDataset split = data::load_split(dir);
  s.apply(split.train);
  s.apply(split.val);
  s.apply(split.test);
  return split;
}

const data::ModalityBatch& pick_split(const data::SplitDataset& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  fail(ErrorKind::UsageError, "unknown split '" + name + "' (expected train, val or test)");
}

// ---- synth ----

struct SynthArgs {
  std::string spec;
  std::string out;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  const data::SynthSpec spec = data::parse_synth_spec(read_text(a.spec));
  const data::SplitDataset ds = data::synth_generate(spec);
  data::write_features(ds, a.out);
  out << "synth: n=" << spec.n << " train=" << ds.train.size() << " val=" << ds.val.size()
      << " test=" << ds.test.size() << " -> " << a.out << "\n";
}

// ---- train ----

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string mcpareto;
  bool timestamps = false;
};

void cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = parse_config(read_text(a.config));
  if (!a.mcpareto.empty()) {
    if (a.mcpareto == "on") {
      cfg.mcpareto = true;
    } else if (a.mcpareto == "off") {
      cfg.mcpareto = false;
    } else {
      fail(ErrorKind::UsageError, "--mcpareto expects on or off, got '" + a.mcpareto + "'");
    }
  }
  const std::string data_dir = a.data.empty() ? cfg.data : a.data;
  if (data_dir.empty()) fail(ErrorKind::UsageError, "no data directory (pass --data or set 'data' in the config)");

  data::SplitDataset split = data::load_split(data_dir);
  if (split.train.empty()) fail(ErrorKind::EmptyDataset, "training split is empty");
  const data::Standardizer standardizer = data::Standardizer::fit(split.train);
  standardizer.apply(split.train);
  standardizer.apply(split.val);
  standardizer.apply(split.test);

  PerModality<std::size_t> dims{};
  for (Modality m : kModalities) dims[index_of(m)] = split.train[m].cols;
  model::TrainState state(cfg, dims);
  state.standardizer = standardizer;

  const fs::path dir = a.out;
  ensure_dir(dir);
  std::string pareto_log = "step,group,cos_beta,alpha_m,lambda,conflict\n";
  std::string metrics_txt;
  std::string history_csv = "epoch,multi,t,a,v\n";
  ordered_json json;
  json["config"] = to_config_text(cfg);
  json["epochs"] = ordered_json::array();

  const auto stamp = [&]() { return a.timestamps ? "[" + wall_clock() + "] " : std::string(); };
  const auto on_step = [&](const model::StepResult& r) {
    for (const pareto::GroupDecision& d : r.decisions) {
      pareto_log += std::to_string(r.step) + "," + d.group + "," + format_real(d.decision.cos_beta) + "," +
                    format_real(d.decision.alpha_m) + "," + format_real(d.decision.lambda) + "," +
                    (d.decision.conflict ? "1" : "0") + "\n";
    }
  };

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const model::StepLosses losses = model::train_epoch(state, split.train, on_step);
    const std::string ep = "epoch." + std::to_string(state.epoch);
    metrics_txt += ep + ".train.multi=" + format_real(losses.multi) + "\n";
    ordered_json ej;
    ej["epoch"] = state.epoch;
    ej["train"]["multi"] = losses.multi;
    for (Modality m : kModalities) {
      const Scalar u = losses.unimodal[index_of(m)];
      metrics_txt += ep + ".train." + std::string(tag(m)) + "=" + format_real(u) + "\n";
      ej["train"][std::string(tag(m))] = u;
    }
    history_csv += std::to_string(state.epoch) + "," + format_real(losses.multi);
    for (Scalar u : losses.unimodal) history_csv += "," + format_real(u);
    history_csv += "\n";
    std::string val_note;
    if (!split.val.empty()) {
      const model::EvalReport val = model::evaluate(state.model, split.val);
      metrics_txt += report_lines(val, ep + ".val");
      ej["val"] = report_json(val);
      val_note = " val_mae=" + format_fixed(val.metrics.mae, 4);
    }
    json["epochs"].push_back(ej);
    out << stamp() << "epoch " << state.epoch << "/" << cfg.epochs << " loss=" << format_fixed(losses.multi, 4)
        << val_note << "\n";
  }

  if (!split.test.empty()) {
    const model::EvalReport test = model::evaluate(state.model, split.test);
    metrics_txt += report_lines(test, "test");
    json["test"] = report_json(test);
    out << stamp() << "test mae=" << format_fixed(test.metrics.mae, 4) << " acc2=" << format_fixed(test.metrics.acc2, 2)
        << "\n";
  }

  checkpoint::save(state, dir / "checkpoint.kmcp");
  viz::write_file(dir / "metrics.txt", metrics_txt);
  viz::write_file(dir / "metrics.json", json.dump(2) + "\n");
  viz::write_file(dir / "loss_history.csv", history_csv);
  viz::write_file(dir / "pareto_log.csv", pareto_log);
  viz::write_file(dir / "loss_curves.svg", viz::plot_loss_curves(state.history));
  out << stamp() << "wrote " << (dir / "checkpoint.kmcp").string() << "\n";
}

// ---- eval ----

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::size_t workers = 1;
  std::string report;
  std::string json;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const model::TrainState state = checkpoint::load(a.checkpoint);
  const data::SplitDataset split = load_standardized(a.data, state.standardizer);
  if (a.workers == 0) fail(ErrorKind::UsageError, "--workers must be >= 1");
  const model::EvalReport report = model::evaluate(state.model, pick_split(split, a.split), a.workers);
  const std::string lines = report_lines(report, a.split);
  out << lines;
  if (!a.report.empty()) viz::write_file(a.report, lines);
  if (!a.json.empty()) viz::write_file(a.json, report_json(report).dump(2) + "\n");
}

// ---- viz ----

struct VizArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string probe = "val";
  std::string edges;
};

void cmd_viz(const VizArgs& a, std::ostream& out) {
  const std::string ext = fs::path(a.out).extension().string();
  if (ext != ".svg" && ext != ".dot") {
    fail(ErrorKind::UsageError, "unsupported output extension '" + ext + "'; supported formats: .svg, .dot");
  }
  const model::TrainState state = checkpoint::load(a.checkpoint);
  const data::SplitDataset split = load_standardized(a.data, state.standardizer);
  const data::ModalityBatch& probe = pick_split(split, a.probe);
  if (probe.empty()) fail(ErrorKind::EmptyDataset, "probe split '" + a.probe + "' is empty");
  const auto attr = model::attribution(state.model, probe);
  viz::write_file(a.out, ext == ".svg" ? viz::render_svg(state.model.head(), attr) :
                                         viz::render_dot(state.model.head(), attr));
  if (!a.edges.empty()) {
    ensure_dir(a.edges);
    const auto& layers = state.model.head().layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (std::size_t q = 0; q < layers[l].n_out(); ++q) {
        for (std::size_t p = 0; p < layers[l].n_in(); ++p) {
          const std::string name = "phi_l" + std::to_string(l) + "_q" + std::to_string(q) + "_p" + std::to_string(p);
          viz::write_file(fs::path(a.edges) / (name + ".svg"), viz::render_edge_function(layers[l], q, p));
        }
      }
    }
  }
  out << "viz: " << attr.size() << " layers, probe=" << a.probe << " (" << probe.size() << " rows) -> " << a.out
      << "\n";
}

// ---- pareto ----

struct ParetoArgs {
  std::string log;
};

void cmd_pareto(const ParetoArgs& a, std::ostream& out) {
  struct Tally {
    std::size_t records = 0;
    std::size_t conflicts = 0;
    double cos_sum = 0;
    double lambda_sum = 0;
  };
  std::map<std::string, Tally> groups;
  std::istringstream in(read_text(a.log));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "step,group,cos_beta,alpha_m,lambda,conflict") {
        fail(ErrorKind::ParseError, a.log + ":1: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    double cos = 0, lambda = 0;
    if (cells.size() != 6 || !parse_real(cells[2], cos) || !parse_real(cells[4], lambda) ||
        (cells[5] != "0" && cells[5] != "1")) {
      fail(ErrorKind::ParseError, a.log + ":" + std::to_string(line_no) + ": malformed record");
    }
    Tally& t = groups[cells[1]];
    ++t.records;
    t.conflicts += cells[5] == "1";
    t.cos_sum += cos;
    t.lambda_sum += lambda;
  }
  if (groups.empty()) fail(ErrorKind::EmptyDataset, "no records in '" + a.log + "'");
  out << "group,records,conflict_rate,mean_cos_beta,mean_lambda\n";
  for (const auto& [name, t] : groups) {
    const double n = static_cast<double>(t.records);
    out << name << "," << t.records << "," << format_fixed(static_cast<double>(t.conflicts) / n, 4) << ","
        << format_fixed(t.cos_sum / n, 4) << "," << format_fixed(t.lambda_sum / n, 4) << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"KAN fusion with information-bottleneck encoders and Pareto gradient balancing"};
  app.name(args.empty() ? "kanmcp" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "Generate a synthetic multimodal dataset");
  s->add_option("--spec", synth.spec, "Synthetic spec file")->required();
  s->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "Train a model");
  t->add_option("--config", train.config, "Run config file")->required();
  t->add_option("--data", train.data, "Feature directory");
  t->add_option("--out", train.out, "Output directory")->required();
  t->add_option("--mcpareto", train.mcpareto, "Override gradient balancing: on or off");
  t->add_flag("--timestamps", train.timestamps, "Prefix progress lines with wall-clock time");

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
  e->add_option("--data", eval.data, "Feature directory")->required();
  e->add_option("--split", eval.split, "train, val or test")->capture_default_str();
  e->add_option("--workers", eval.workers, "Evaluation threads")->capture_default_str();
  e->add_option("--report", eval.report, "Write key=value metrics here");
  e->add_option("--json", eval.json, "Write JSON metrics here");

  VizArgs vz;
  CLI::App* v = app.add_subcommand("viz", "Render the head's edge attributions");
  v->add_option("--checkpoint", vz.checkpoint, "Checkpoint file")->required();
  v->add_option("--data", vz.data, "Feature directory")->required();
  v->add_option("--out", vz.out, "Output file (.svg or .dot)")->required();
  v->add_option("--probe", vz.probe, "Probe split")->capture_default_str();
  v->add_option("--edges", vz.edges, "Also write one SVG per edge function into this directory");

  ParetoArgs pareto;
  CLI::App* p = app.add_subcommand("pareto", "Summarize a Pareto decision log");
  p->add_option("--log", pareto.log, "pareto_log.csv from a training run")->required();

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    std::string msg = ex.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    err << to_string(ErrorKind::UsageError) << ": " << msg << "\n";
    return exit_code(ErrorKind::UsageError);
  }

  try {
    if (s->parsed()) cmd_synth(synth, out);
    if (t->parsed()) cmd_train(train, out);
    if (e->parsed()) cmd_eval(eval, out);
    if (v->parsed()) cmd_viz(vz, out);
    if (p->parsed()) cmd_pareto(pareto, out);
  } catch (const Error& ex) {
    err << ex.describe() << "\n";
    return exit_code(ex.kind());
  } catch (const std::exception& ex) {
    err << "Error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace kanmcp::cli
