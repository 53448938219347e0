// tfn: data generation, training, evaluation, equivariance checking and
// radial-curve export for the tensor-field-network demonstrations.
//
// Exit codes: 0 success, 1 validation/usage error, 2 property-check failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tfn/checkpoint.hpp"
#include "tfn/datasets.hpp"
#include "tfn/equivariance.hpp"
#include "tfn/run_config.hpp"
#include "tfn/train.hpp"
#include "tfn/wigner.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitPropertyFailure = 2;

std::string args_hash(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  return tfn::io::fnv1a_hex(os.str());
}

int cmd_gen_data(const std::string& task, uint64_t seed, int count, const std::string& out,
                 bool rotate, bool translate) {
  std::vector<tfn::tasks::LabeledSample> samples;
  if (task == "tetris") {
    samples = count > 0 ? tfn::tasks::gen_tetris_n(count, rotate, translate, seed)
                        : tfn::tasks::gen_tetris(rotate, translate, seed);
  } else if (task == "gravity") {
    samples = tfn::tasks::gen_gravity_set(count > 0 ? count : 1000, seed);
  } else if (task == "inertia") {
    samples = tfn::tasks::gen_inertia_set(count > 0 ? count : 1000, seed);
  } else if (task == "missing-point" || task == "missing_point") {
    const int n = count > 0 ? count : static_cast<int>(tfn::tasks::missing_point_cases().size());
    samples = tfn::tasks::gen_missing_point(n, rotate, translate, seed);
  } else {
    std::cerr << "gen-data: unknown task '" << task << "'\n";
    return kExitValidation;
  }
  const std::string hash = args_hash({{"cmd", "gen-data"},
                                      {"task", task},
                                      {"seed", std::to_string(seed)},
                                      {"count", std::to_string(count)},
                                      {"rotate", rotate ? "1" : "0"},
                                      {"translate", translate ? "1" : "0"}});
  tfn::tasks::save_jsonl(out, samples, hash);
  std::cout << "wrote " << samples.size() << " records to " << out << " (config " << hash << ")\n";
  return kExitOk;
}

void write_metrics_csv(const std::string& path, const tfn::tasks::TrainResult& result,
                       const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "# schema=tfn.metrics.v1 config_hash=" << hash << '\n';
  std::vector<std::string> keys;
  if (!result.history.empty()) {
    for (const auto& [k, v] : result.history.front().metrics) keys.push_back(k);
  }
  out << "epoch,loss";
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  out.precision(17);
  for (const auto& row : result.history) {
    out << row.epoch << ',' << row.loss;
    for (const auto& k : keys) out << ',' << row.metrics.at(k);
    out << '\n';
  }
}

int cmd_train(const std::string& config_path) {
  const tfn::io::RunConfig config = tfn::io::parse_run_config_file(config_path);
  const std::string hash = tfn::io::config_hash(config);
  const tfn::tasks::TrainConfig tc = config.to_train_config();

  tfn::model::ModelSpec spec = tfn::tasks::build_net(tc);
  if (spec.max_order() > config.l_max) {
    throw std::invalid_argument("config: task '" + config.task + "' needs l_max >= " +
                                std::to_string(spec.max_order()));
  }
  tfn::model::Network net(std::move(spec));
  net.init_params(config.seed);

  std::vector<tfn::tasks::LabeledSample> data;
  if (!config.data.empty()) {
    data = tfn::tasks::load_jsonl(config.data);
  } else {
    data = tfn::tasks::default_train_set(tc);
  }

  const tfn::tasks::TrainResult result = tfn::tasks::train(net, data, tc);

  std::filesystem::create_directories(config.out_dir);
  const std::string ckpt_path = config.out_dir + "/checkpoint.json";
  tfn::model::save_checkpoint(ckpt_path, net.spec(), net.params(), hash);
  std::ofstream model_out(config.out_dir + "/model.json");
  model_out << tfn::model::model_spec_to_json(net.spec()) << '\n';
  write_metrics_csv(config.out_dir + "/metrics.csv", result, hash);

  std::cout << "trained " << config.task << " for " << result.steps << " steps (config " << hash << ")\n";
  if (!result.history.empty()) {
    std::cout << "final loss " << result.history.back().loss;
    for (const auto& [k, v] : result.history.back().metrics) std::cout << ", " << k << " " << v;
    std::cout << '\n';
  }
  std::cout << "checkpoint: " << ckpt_path << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path) {
  const tfn::model::Checkpoint ckpt = tfn::model::load_checkpoint(ckpt_path);
  tfn::model::Network net(ckpt.spec);
  net.set_params(ckpt.params);
  const auto data = tfn::tasks::load_jsonl(data_path);
  if (data.empty()) throw std::invalid_argument("eval: empty dataset");
  if (data.front().task != net.spec().task) {
    throw std::invalid_argument("eval: dataset task '" + data.front().task +
                                "' does not match checkpoint task '" + net.spec().task + "'");
  }
  const auto metrics = tfn::tasks::evaluate(net, data);
  for (const auto& [k, v] : metrics) std::cout << k << "=" << v << '\n';
  return kExitOk;
}

int cmd_check_equivariance(const std::string& ckpt_path, const std::string& random_init_task,
                           int trials, double tol, uint64_t seed, const std::string& out_path,
                           bool mutate) {
  tfn::model::ModelSpec spec;
  tfn::model::ParamStore params;
  if (!ckpt_path.empty()) {
    tfn::model::Checkpoint ckpt = tfn::model::load_checkpoint(ckpt_path);
    spec = std::move(ckpt.spec);
    params = std::move(ckpt.params);
  } else {
    const tfn::tasks::TrainConfig tc = tfn::tasks::default_config(random_init_task);
    spec = tfn::tasks::build_net(tc);
  }
  tfn::model::Network net(spec);
  if (!params.empty()) {
    net.set_params(std::move(params));
  } else {
    net.init_params(seed);
  }
  const std::string& task = net.spec().task;

  // representative cloud + input features for the task
  tfn::tasks::LabeledSample sample;
  if (task == "tetris") {
    sample = tfn::tasks::gen_tetris(false, false, seed).front();
  } else if (task == "gravity") {
    sample = tfn::tasks::gen_gravity(seed);
  } else if (task == "inertia") {
    sample = tfn::tasks::gen_inertia(seed);
  } else {
    sample = tfn::tasks::gen_missing_point(1, false, false, seed).front();
  }
  const tfn::PointCloud& cloud = sample.cloud;
  const int64_t n = cloud.num_points();
  tfn::layers::FeatureValues input{{0, tfn::NdArray::full({n, 1, 1}, 1.0)}};

  // the network derives its own input features from the cloud, so the
  // wrapper ignores the feature argument
  tfn::equiv::FeatureModel feature_model = [&](const tfn::PointCloud& c,
                                               const tfn::layers::FeatureValues&) {
    tfn::layers::FeatureValues out = net.eval_features(c);
    if (mutate) {
      // deliberately m-dependent reweighting; a correct checker must flag it
      for (auto& [l, block] : out) {
        if (l == 0) continue;
        const int nm = 2 * l + 1;
        for (int64_t i = 0; i < block.size(); ++i) {
          block[i] *= 1.0 + 0.05 * static_cast<double>(i % nm);
        }
      }
    }
    return out;
  };

  std::vector<tfn::equiv::EquivarianceReport> reports;
  reports.push_back(
      tfn::equiv::check_rotation(feature_model, cloud, input, net.cg(), trials, tol, seed + 1));
  reports.push_back(tfn::equiv::check_translation(feature_model, cloud, input, trials, 1e-12, seed + 2));
  reports.push_back(tfn::equiv::check_permutation(feature_model, cloud, input, trials, 1e-12, seed + 3));
  for (auto& r : reports) r.subject = task + " features";

  if (task == "tetris") {
    tfn::equiv::FeatureModel logit_model = [&](const tfn::PointCloud& c,
                                               const tfn::layers::FeatureValues&) {
      tfn::ad::Tape tape;
      const auto bound = net.forward(tape, c);
      return tfn::layers::FeatureValues{{0, tape.value(*bound.out.logits).reshaped({1, 8, 1})}};
    };
    auto r = tfn::equiv::check_rotation(logit_model, cloud, input, net.cg(), trials, tol, seed + 4);
    r.subject = "tetris logits";
    reports.push_back(std::move(r));
  }
  if (task == "missing_point") {
    tfn::equiv::PositionModel vote_model = [&](const tfn::PointCloud& c,
                                               const tfn::layers::FeatureValues&) -> tfn::so3::Vec3 {
      tfn::ad::Tape tape;
      const auto bound = net.forward(tape, c);
      const tfn::NdArray& u = tape.value(*bound.out.vote_position);
      return {u[0], u[1], u[2]};
    };
    auto rot = tfn::equiv::check_rotation_position(vote_model, cloud, input, net.cg(), trials, tol, seed + 5);
    rot.subject = "vote position";
    reports.push_back(std::move(rot));
    auto tr = tfn::equiv::check_translation_position(vote_model, cloud, input, trials, 1e-12, seed + 6);
    tr.subject = "vote position";
    reports.push_back(std::move(tr));
  }

  bool all_pass = true;
  for (const auto& r : reports) {
    std::cout << r.to_table() << '\n';
    all_pass = all_pass && r.pass;
  }

  if (!out_path.empty()) {
    json j;
    j["schema"] = "tfn.equivariance_report.v1";
    j["config_hash"] = args_hash({{"cmd", "check-equivariance"},
                                  {"checkpoint", ckpt_path},
                                  {"random_init", random_init_task},
                                  {"trials", std::to_string(trials)},
                                  {"tol", std::to_string(tol)},
                                  {"seed", std::to_string(seed)},
                                  {"mutate", mutate ? "1" : "0"}});
    j["task"] = task;
    j["trials"] = trials;
    j["pass"] = all_pass;
    json list = json::array();
    for (const auto& r : reports) list.push_back(json::parse(r.to_json()));
    j["reports"] = std::move(list);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << j.dump(2) << '\n';
  }
  return all_pass ? kExitOk : kExitPropertyFailure;
}

int cmd_dump_radial(const std::string& ckpt_path, double r_min, double r_max, int steps,
                    const std::string& out_path) {
  if (steps < 1 || !(r_max >= r_min)) {
    throw std::invalid_argument("dump-radial: need steps >= 1 and r-max >= r-min");
  }
  const tfn::model::Checkpoint ckpt = tfn::model::load_checkpoint(ckpt_path);
  tfn::model::Network net(ckpt.spec);
  net.set_params(ckpt.params);

  const auto prefixes = tfn::tasks::radial_prefixes(net.spec());
  if (prefixes.empty()) throw std::invalid_argument("dump-radial: model has no radial nets");

  std::vector<double> radii;
  for (int i = 0; i < steps; ++i) {
    radii.push_back(steps == 1 ? r_min : r_min + (r_max - r_min) * i / (steps - 1));
  }

  struct Column {
    std::string prefix;
    std::vector<double> learned;
    std::vector<double> analytic;  // empty when the task defines no oracle
    double scale = 0.0;
  };
  std::vector<Column> columns;
  for (const auto& prefix : prefixes) {
    Column col;
    col.prefix = prefix;
    col.learned = tfn::tasks::radial_curve(net, prefix, radii);
    if (const auto oracle = tfn::tasks::analytic_radial(net.spec().task, prefix)) {
      for (const double r : radii) col.analytic.push_back(oracle(r));
      col.scale = tfn::tasks::fit_radial(col.learned, col.analytic).scale;
    }
    columns.push_back(std::move(col));
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << "# schema=tfn.radial.v1 config_hash=" << ckpt.config_hash << '\n';
  out << "r";
  for (const auto& col : columns) {
    out << ",learned:" << col.prefix;
    if (!col.analytic.empty()) out << ",analytic:" << col.prefix << ",rel_err:" << col.prefix;
  }
  out << '\n';
  out.precision(17);
  for (size_t i = 0; i < radii.size(); ++i) {
    out << radii[i];
    for (const auto& col : columns) {
      out << ',' << col.learned[i];
      if (!col.analytic.empty()) {
        const double ref = col.scale * col.analytic[i];
        out << ',' << col.analytic[i] << ','
            << (ref != 0.0 ? std::abs(col.learned[i] - ref) / std::abs(ref) : 0.0);
      }
    }
    out << '\n';
  }
  std::cout << "wrote " << radii.size() << " rows to " << out_path << '\n';
  return kExitOk;
}

int cmd_dump_cg(int l_max, const std::string& out_path) {
  const tfn::so3::CGTable table(l_max);
  json j;
  j["schema"] = "tfn.cg.v1";
  j["l_max"] = l_max;
  j["config_hash"] = args_hash({{"cmd", "dump-cg"}, {"l_max", std::to_string(l_max)}});
  json records = json::array();
  for (const auto& key : table.keys()) {
    for (int mo = -key.l_out; mo <= key.l_out; ++mo)
      for (int mf = -key.l_a; mf <= key.l_a; ++mf)
        for (int mi = -key.l_b; mi <= key.l_b; ++mi) {
          const double v = table.coefficient(key.l_out, mo, key.l_a, mf, key.l_b, mi);
          if (v == 0.0) continue;
          records.push_back({{"l_o", key.l_out},
                             {"l_f", key.l_a},
                             {"l_i", key.l_b},
                             {"m_o", mo},
                             {"m_f", mf},
                             {"m_i", mi},
                             {"value", v}});
        }
  }
  j["records"] = std::move(records);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << j.dump(2) << '\n';
  std::cout << "wrote " << j["records"].size() << " coefficients to " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor field network toolkit"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a JSON-lines dataset");
  std::string gen_task, gen_out = "data.jsonl";
  uint64_t gen_seed = 0;
  int gen_count = 0;
  bool gen_rotate = false, gen_translate = false;
  gen->add_option("--task", gen_task, "tetris | gravity | inertia | missing-point")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--count", gen_count, "record count (task default when omitted)");
  gen->add_option("--out", gen_out, "output path");
  gen->add_flag("--rotate", gen_rotate, "random rotation per record (shape tasks)");
  gen->add_flag("--translate", gen_translate, "random translation per record (shape tasks)");

  // train
  auto* train = app.add_subcommand("train", "train a model from a key=value config file");
  std::string train_config;
  train->add_option("--config", train_config, "config file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  std::string eval_ckpt, eval_data;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint.json")->required();
  eval->add_option("--data", eval_data, "JSON-lines dataset")->required();

  // check-equivariance
  auto* check = app.add_subcommand("check-equivariance", "equivariance property checks");
  std::string check_ckpt, check_random, check_out;
  int check_trials = 50;
  double check_tol = 1e-8;
  uint64_t check_seed = 0;
  bool check_mutate = false;
  check->add_option("--checkpoint", check_ckpt, "checkpoint.json");
  check->add_option("--random-init", check_random, "task name for a fresh random model");
  check->add_option("--trials", check_trials, "random transforms per check");
  check->add_option("--tol", check_tol, "rotation tolerance");
  check->add_option("--seed", check_seed, "trial seed");
  check->add_option("--out", check_out, "JSON report path");
  check->add_flag("--mutate", check_mutate, "break the model on purpose (checker self-test)");

  // dump-radial
  auto* radial = app.add_subcommand("dump-radial", "export learned radial curves as CSV");
  std::string radial_ckpt, radial_out = "radial.csv";
  double radial_rmin = 0.1, radial_rmax = 2.0;
  int radial_steps = 100;
  radial->add_option("--checkpoint", radial_ckpt, "checkpoint.json")->required();
  radial->add_option("--r-min", radial_rmin, "band start");
  radial->add_option("--r-max", radial_rmax, "band end");
  radial->add_option("--steps", radial_steps, "row count");
  radial->add_option("--out", radial_out, "CSV path");

  // dump-cg
  auto* cg = app.add_subcommand("dump-cg", "export the Clebsch-Gordan table as JSON");
  int cg_lmax = 2;
  std::string cg_out = "cg.json";
  cg->add_option("--l-max", cg_lmax, "table order bound");
  cg->add_option("--out", cg_out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_task, gen_seed, gen_count, gen_out, gen_rotate, gen_translate);
    if (train->parsed()) return cmd_train(train_config);
    if (eval->parsed()) return cmd_eval(eval_ckpt, eval_data);
    if (check->parsed()) {
      if (check_ckpt.empty() == check_random.empty()) {
        std::cerr << "check-equivariance: pass exactly one of --checkpoint or --random-init\n";
        return kExitValidation;
      }
      return cmd_check_equivariance(check_ckpt, check_random, check_trials, check_tol, check_seed,
                                    check_out, check_mutate);
    }
    if (radial->parsed()) return cmd_dump_radial(radial_ckpt, radial_rmin, radial_rmax, radial_steps, radial_out);
    if (cg->parsed()) return cmd_dump_cg(cg_lmax, cg_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
