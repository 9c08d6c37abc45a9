// atlasbench: scene generation, QA encoding, planner training, inference, evaluation, plots.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "atlasbench/dataset.hpp"
#include "atlasbench/errors.hpp"
#include "atlasbench/planner/pipeline.hpp"
#include "atlasbench/report.hpp"
#include "atlasbench/scene_sim.hpp"
#include "manifest.hpp"
#include "svg.hpp"

using namespace atlasbench;
using namespace atlasbench::planner;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
};

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

std::optional<std::string> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

template <class T>
T with_file(const std::string& path, auto&& read) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  return read(in);
}

void write_file(const std::string& path, auto&& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write(out);
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::vector<Scene> read_scenes(const std::string& p) {
  return with_file<std::vector<Scene>>(p, [](std::istream& in) { return read_scenes_jsonl(in); });
}
std::vector<QaPair> read_dataset(const std::string& p) {
  return with_file<std::vector<QaPair>>(p, [](std::istream& in) { return read_qa_jsonl(in); });
}
std::vector<Prediction> read_preds(const std::string& p) {
  return with_file<std::vector<Prediction>>(p, [](std::istream& in) { return read_predictions_jsonl(in); });
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

std::vector<Task> parse_tasks(const std::string& list) {
  std::vector<Task> tasks;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = parse_task(item);
    if (!t) throw ConfigError("unknown task '" + item + "'");
    tasks.push_back(*t);
  }
  if (tasks.empty()) throw ConfigError("--tasks needs at least one task");
  return tasks;
}

EgoFootprint parse_ego_dims(const std::string& s) {
  double l = 0, w = 0;
  char sep = 0;
  std::stringstream ss(s);
  if (!(ss >> l >> sep >> w) || (sep != ',' && sep != 'x') || !ss.eof() || l <= 0 || w <= 0) {
    throw ConfigError("--ego-dims expects LENGTH,WIDTH in meters, got '" + s + "'");
  }
  return {l, w};
}

L2Convention parse_l2(const std::string& s) {
  if (s == "stp3") return L2Convention::stp3;
  if (s == "at-horizon") return L2Convention::at_horizon;
  throw ConfigError("--l2-convention expects stp3 or at-horizon, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic driving QA benchmark: scenes, QA pairs, a toy planner and its metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ATLASBENCH_VERSION);

  // gen
  Common gen_c;
  int gen_n = 100;
  auto* gen = app.add_subcommand("gen", "Generate synthetic scenes as JSONL");
  gen->add_option("--config", gen_c.config, "INI run config ([scene] section)")->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_c.seed, "Seed of the first scene; scene i uses seed + i");
  gen->add_option("-n,--n", gen_n, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_c.out, "Output JSONL")->required();

  // encode
  Common enc_c;
  std::string enc_scenes, enc_tasks = "planning", enc_chain = "V-A-P", enc_layout = "unified";
  auto* enc = app.add_subcommand("encode", "Build QA pairs from scenes");
  enc->add_option("--scenes", enc_scenes, "Scenes JSONL")->required()->check(CLI::ExistingFile);
  enc->add_option("--tasks", enc_tasks, "Comma-separated tasks: planning, detection, lane, caption");
  enc->add_option("--chain", enc_chain, "Planning answer chain, e.g. V-A-P or V-A-Y-T-P");
  enc->add_option("--layout", enc_layout, "Perception slot layout")->check(CLI::IsMember({"unified", "per-view"}));
  enc->add_option("--seed", enc_c.seed, "Seed for question template choice");
  enc->add_option("--out", enc_c.out, "Output QA JSONL")->required();

  // train
  Common tr_c;
  std::string tr_dataset, tr_scenes, tr_chain, tr_rp;
  int tr_epochs = 0;
  bool tr_text_only = false;
  auto* tr = app.add_subcommand("train", "Train the toy planner");
  tr->add_option("--dataset", tr_dataset, "QA JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("--scenes", tr_scenes, "Scenes JSONL the dataset was built from")->required()->check(CLI::ExistingFile);
  tr->add_option("--config", tr_c.config, "INI run config")->check(CLI::ExistingFile);
  tr->add_option("--seed", tr_c.seed, "Initialization and shuffling seed");
  tr->add_option("--chain", tr_chain, "Expected planning chain; must match the dataset");
  tr->add_option("--rp-embedding", tr_rp, "Reference-point embedding")
      ->check(CLI::IsMember({"rp", "none", "sincos", "learned"}));
  tr->add_option("--epochs", tr_epochs, "Override [train] epochs")->check(CLI::PositiveNumber);
  tr->add_flag("--text-only", tr_text_only, "Drop the <query> slots (text-only ablation)");
  tr->add_option("--out", tr_c.out, "Output checkpoint JSON")->required();

  // infer
  Common inf_c;
  std::string inf_dataset, inf_scenes, inf_ckpt, inf_mode = "greedy";
  double inf_temperature = 1.0;
  int inf_max_tokens = 128;
  auto* inf = app.add_subcommand("infer", "Decode answers for a QA dataset");
  inf->add_option("--dataset", inf_dataset, "QA JSONL")->required()->check(CLI::ExistingFile);
  inf->add_option("--scenes", inf_scenes, "Scenes JSONL")->check(CLI::ExistingFile);
  inf->add_option("--checkpoint", inf_ckpt, "Checkpoint JSON")->check(CLI::ExistingFile);
  inf->add_option("--mode", inf_mode, "greedy or sample decode; oracle emits ground truth; stationary predicts no motion")
      ->check(CLI::IsMember({"greedy", "sample", "oracle", "stationary"}));
  inf->add_option("--temperature", inf_temperature, "Sampling temperature")->check(CLI::PositiveNumber);
  inf->add_option("--max-tokens", inf_max_tokens, "Generated-token cap")->check(CLI::PositiveNumber);
  inf->add_option("--seed", inf_c.seed, "Sampling seed");
  inf->add_option("--out", inf_c.out, "Output predictions JSONL")->required();

  // eval
  Common ev_c;
  std::string ev_preds, ev_scenes, ev_method = "model", ev_dims, ev_l2, ev_chain;
  auto* ev = app.add_subcommand("eval", "Score predictions: JSON report plus planning CSV");
  ev->add_option("--preds", ev_preds, "Predictions JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--scenes", ev_scenes, "Scenes JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--config", ev_c.config, "INI run config ([eval] section)")->check(CLI::ExistingFile);
  ev->add_option("--method", ev_method, "Method name in the report");
  ev->add_option("--chain", ev_chain, "Chain for planning answers that do not name one");
  ev->add_option("--ego-dims", ev_dims, "Ego footprint LENGTH,WIDTH in meters");
  ev->add_option("--l2-convention", ev_l2, "stp3 or at-horizon")->check(CLI::IsMember({"stp3", "at-horizon"}));
  ev->add_option("--out", ev_c.out, "Output report JSON; the CSV goes next to it")->required();

  // plot
  Common pl_c;
  std::vector<std::string> pl_reports;
  std::string pl_preds, pl_scenes, pl_dims;
  int pl_max = 8;
  auto* pl = app.add_subcommand("plot", "SVG plots and the planning table from reports and predictions");
  pl->add_option("--report", pl_reports, "Report JSON (repeatable)")->check(CLI::ExistingFile);
  pl->add_option("--preds", pl_preds, "Predictions JSONL for BEV plots")->check(CLI::ExistingFile);
  pl->add_option("--scenes", pl_scenes, "Scenes JSONL for BEV plots")->check(CLI::ExistingFile);
  pl->add_option("--ego-dims", pl_dims, "Ego footprint LENGTH,WIDTH in meters");
  pl->add_option("--max-plots", pl_max, "BEV plots to draw")->check(CLI::NonNegativeNumber);
  pl->add_option("--out", pl_c.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    cli::RunManifest m;
    m.threads = cli::thread_cap();
    Eigen::setNbThreads(m.threads);

    if (*gen) {
      const RunConfig c = load_config(gen_c.config);
      const auto scenes = generate_scenes(gen_c.seed, gen_n, c.scene);
      write_file(gen_c.out, [&](std::ostream& o) { write_scenes_jsonl(scenes, o); });
      m = {"gen", opt_path(gen_c.config), gen_c.seed, {}, {gen_c.out}, m.threads};
      m.write(manifest_path(gen_c.out));
    } else if (*enc) {
      DatasetOptions o;
      o.tasks = parse_tasks(enc_tasks);
      o.chain = ChainSpec::parse(enc_chain);
      o.layout = enc_layout == "per-view" ? SlotLayout::per_view : SlotLayout::unified;
      o.seed = enc_c.seed;
      const auto pairs = build_dataset(read_scenes(enc_scenes), o);
      write_file(enc_c.out, [&](std::ostream& out) { write_qa_jsonl(pairs, out); });
      m = {"encode", std::nullopt, enc_c.seed, {enc_scenes}, {enc_c.out}, m.threads};
      m.write(manifest_path(enc_c.out));
    } else if (*tr) {
      RunConfig c = load_config(tr_c.config);
      if (!tr_rp.empty()) c.model.rp_embedding = *parse_ref_embedding(tr_rp);
      if (tr_epochs > 0) c.train.epochs = tr_epochs;
      if (tr_text_only) c.model.inject_queries = false;
      const auto scenes = read_scenes(tr_scenes);
      const auto pairs = read_dataset(tr_dataset);
      for (const auto& p : pairs) {
        if (p.chain) {
          c.model.chain = *p.chain;
          break;
        }
      }
      if (!tr_chain.empty() && !(ChainSpec::parse(tr_chain) == c.model.chain)) {
        throw ConfigError("--chain " + tr_chain + " does not match the dataset's chain " + c.model.chain.to_string());
      }
      long total = 0;
      double window = 0.0;
      const auto fit = fit_planner(pairs, scenes, c, tr_c.seed, [&](long step, double loss) {
        window += loss;
        if (++total % 500 == 0) {
          std::fprintf(stderr, "step %ld  loss %.4f\n", step, window / 500);
          window = 0.0;
        }
      });
      std::fprintf(stderr, "loss %.4f -> %.4f over %ld steps\n", fit.stats.initial_loss, fit.stats.final_loss,
                   fit.stats.steps);
      write_file(tr_c.out, [&](std::ostream& o) { write_checkpoint(fit.checkpoint, o); });
      m = {"train", opt_path(tr_c.config), tr_c.seed, {tr_dataset, tr_scenes}, {tr_c.out}, m.threads};
      m.write(manifest_path(tr_c.out));
    } else if (*inf) {
      const auto pairs = read_dataset(inf_dataset);
      std::vector<Prediction> preds;
      std::vector<std::string> inputs{inf_dataset};
      if (inf_mode == "oracle") {
        // Exact waypoints for planning (no quantization), reference answers otherwise.
        if (inf_scenes.empty()) throw ConfigError("--mode oracle needs --scenes");
        const auto scenes = read_scenes(inf_scenes);
        inputs.push_back(inf_scenes);
        for (const auto& p : pairs) {
          Prediction pr;
          pr.scene_id = p.scene_id;
          pr.frame = p.frame;
          pr.task = p.task;
          if (p.task == Task::planning) {
            const auto it = std::ranges::find(scenes, p.scene_id, &Scene::id);
            if (it == scenes.end()) throw DataError("pair refers to unknown scene '" + p.scene_id + "'");
            pr.waypoints = ground_truth_plan(*it, p.frame);
          } else {
            pr.answer_text = p.answer;
          }
          preds.push_back(std::move(pr));
        }
      } else if (inf_mode == "stationary") {
        preds = stationary_predictions(pairs);
      } else {
        if (inf_ckpt.empty() || inf_scenes.empty()) {
          throw ConfigError("--mode " + inf_mode + " needs --checkpoint and --scenes");
        }
        const auto ckpt = with_file<Checkpoint>(inf_ckpt, [](std::istream& in) { return read_checkpoint(in); });
        DecodeOptions d;
        d.mode = inf_mode == "sample" ? DecodeOptions::Mode::sample : DecodeOptions::Mode::greedy;
        d.temperature = inf_temperature;
        d.max_tokens = inf_max_tokens;
        d.seed = inf_c.seed;
        preds = predict(ckpt, pairs, read_scenes(inf_scenes), d);
        inputs.push_back(inf_scenes);
        inputs.push_back(inf_ckpt);
      }
      write_file(inf_c.out, [&](std::ostream& o) { write_predictions_jsonl(preds, o); });
      m = {"infer", std::nullopt, inf_c.seed, inputs, {inf_c.out}, m.threads};
      m.write(manifest_path(inf_c.out));
    } else if (*ev) {
      const RunConfig c = load_config(ev_c.config);
      EvalOptions o{ev_method, c.footprint, c.l2};
      if (!ev_dims.empty()) o.footprint = parse_ego_dims(ev_dims);
      if (!ev_l2.empty()) o.l2 = parse_l2(ev_l2);
      auto preds = read_preds(ev_preds);
      if (!ev_chain.empty()) {
        const auto chain = ChainSpec::parse(ev_chain);
        for (auto& p : preds) {
          if (p.task == Task::planning && !p.chain) p.chain = chain;
        }
      }
      const auto report = evaluate(preds, read_scenes(ev_scenes), o);
      const std::string csv = fs::path(ev_c.out).replace_extension(".csv").string();
      write_file(ev_c.out, [&](std::ostream& out) { write_report_json(report, out); });
      write_file(csv, [&](std::ostream& out) { write_planning_csv(std::span(&report, 1), out); });
      m = {"eval", opt_path(ev_c.config), std::nullopt, {ev_preds, ev_scenes}, {ev_c.out, csv}, m.threads};
      m.write(manifest_path(ev_c.out));
    } else if (*pl) {
      if (pl_reports.empty() && pl_preds.empty()) throw ConfigError("plot needs --report or --preds");
      if (!pl_preds.empty() && pl_scenes.empty()) throw ConfigError("--preds needs --scenes");
      fs::create_directories(pl_c.out);
      const fs::path dir(pl_c.out);
      std::vector<std::string> outputs;
      std::vector<MetricReport> reports;
      for (const auto& r : pl_reports) {
        reports.push_back(with_file<MetricReport>(r, [](std::istream& in) { return read_report_json(in); }));
      }
      if (!reports.empty()) {
        const auto csv = (dir / "planning.csv").string();
        write_file(csv, [&](std::ostream& o) { write_planning_csv(reports, o); });
        outputs.push_back(csv);
        std::map<double, std::vector<cli::NamedCurve>> by_threshold;
        for (const auto& r : reports) {
          for (const auto& [thr, pts] : r.pr_curves) by_threshold[thr].push_back({r.method, pts});
        }
        for (const auto& [thr, curves] : by_threshold) {
          char name[32];
          std::snprintf(name, sizeof name, "pr_%.1fm.svg", thr);
          cli::write_text(dir / name, cli::pr_svg(thr, curves));
          outputs.push_back((dir / name).string());
        }
      }
      if (!pl_preds.empty()) {
        const auto scenes = read_scenes(pl_scenes);
        const EgoFootprint fp = pl_dims.empty() ? EgoFootprint{} : parse_ego_dims(pl_dims);
        int drawn = 0;
        for (const auto& p : read_preds(pl_preds)) {
          if (drawn >= pl_max) break;
          if (p.task != Task::planning) continue;
          const Scene* s = nullptr;
          for (const auto& sc : scenes) {
            if (sc.id == p.scene_id) s = &sc;
          }
          if (s == nullptr) throw DataError("prediction refers to unknown scene '" + p.scene_id + "'");
          const auto name = "bev_" + p.scene_id + "_" + std::to_string(p.frame) + ".svg";
          cli::write_text(dir / name, cli::bev_svg(*s, p.frame, predicted_plan(p).value_or(Trajectory{}), fp));
          outputs.push_back((dir / name).string());
          ++drawn;
        }
      }
      std::vector<std::string> inputs = pl_reports;
      if (!pl_preds.empty()) {
        inputs.push_back(pl_preds);
        inputs.push_back(pl_scenes);
      }
      m = {"plot", std::nullopt, std::nullopt, inputs, outputs, m.threads};
      m.write(dir / "manifest.json");
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure at step " << e.step() << ": " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
}
