// latentcloud: dataset generation, training, evaluation, one-shot encode /
// decode / interpolation and the HTTP studio backend.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure,
// 4 I/O or bind failure.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/data.hpp"
#include "latentcloud/error.hpp"
#include "latentcloud/evaluation.hpp"
#include "latentcloud/latent.hpp"
#include "latentcloud/metrics.hpp"
#include "latentcloud/service.hpp"

namespace fs = std::filesystem;
using namespace latentcloud;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

// Validation items whose EMD is reported every epoch.
constexpr std::size_t kEmdValidationItems = 8;

template <typename T>
std::vector<T> split_list(const std::string& text, T (*convert)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ConfigError("empty element in list '" + text + "'");
    out.push_back(convert(item));
  }
  return out;
}

std::size_t to_size(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || v <= 0) throw ConfigError("expected a positive integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

std::string to_string_id(const std::string& s) { return s; }

struct GenDataArgs {
  std::string out;
  std::size_t count = 200;
  std::string families = "box-chair,table,lamp";
  std::size_t points = 2048;
  std::uint64_t seed = 0;
};

int run_gen_data(const GenDataArgs& a) {
  DatasetSpec spec;
  spec.families.clear();
  for (const auto& name : split_list<std::string>(a.families, to_string_id)) {
    spec.families.push_back(parse_family(name));
  }
  spec.count = a.count;
  spec.points = a.points;
  spec.seed = a.seed;
  const DatasetManifest m = build_dataset(spec, a.out);
  std::cout << "wrote " << m.entries.size() << " clouds of " << m.point_count << " points to "
            << (fs::path(a.out) / kManifestFileName).string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string dataset;
  std::string out_model;
  std::string loss_log;
  std::size_t latent = 32;
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  double val_split = 0.1;
  std::string encoder_widths = "64,128,256";
  std::string decoder_widths = "256,512";
  std::size_t checkpoint_every = 0;
  double emd_epsilon = kEvalEmdEpsilon;
};

int run_train(const TrainArgs& a) {
  const DatasetManifest manifest = load_manifest(a.dataset);
  const std::vector<PointCloud> inputs = load_model_inputs(manifest);
  const DatasetSplit split = split_dataset(inputs.size(), a.val_split, a.seed);

  AEConfig config;
  config.input_points = manifest.point_count;
  config.output_points = manifest.point_count;
  config.latent_size = a.latent;
  config.encoder_widths = split_list<std::size_t>(a.encoder_widths, to_size);
  config.decoder_widths = split_list<std::size_t>(a.decoder_widths, to_size);
  config.seed = a.seed;
  AEModel model = make_model(config);
  model.metadata.split_seed = a.seed;
  model.metadata.validation_fraction = a.val_split;

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch_size;
  tc.adam = {a.lr, a.beta1, a.beta2, a.adam_epsilon};
  tc.seed = a.seed;
  tc.checkpoint_interval = a.checkpoint_every;
  tc.validate();

  std::vector<PointCloud> train_set;
  for (std::size_t i : split.train) train_set.push_back(inputs[i]);

  const fs::path log_path = a.loss_log.empty() ? fs::path(a.out_model + ".loss.csv") : fs::path(a.loss_log);
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw IoError("cannot open loss log " + log_path.string());
  log << "epoch,train_chamfer,val_chamfer,val_emd_approx\n";

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochReport& r, const AEModel& m) {
    std::string val_chamfer, val_emd;
    if (!split.validation.empty()) {
      double sum_cd = 0.0, sum_emd = 0.0;
      std::size_t n_emd = 0;
      for (std::size_t k = 0; k < split.validation.size(); ++k) {
        const PointCloud& target = inputs[split.validation[k]];
        PointCloud recon = target;
        try {
          recon = decode(m, encode(m, target));
        } catch (const ConfigError&) {
          throw DivergenceError("training diverged: non-finite validation reconstruction at epoch " +
                                    std::to_string(r.epoch),
                                r.epoch);
        }
        sum_cd += chamfer(recon, target);
        if (k < kEmdValidationItems) {
          sum_emd += emd_approx(recon, target, a.emd_epsilon).cost;
          ++n_emd;
        }
      }
      val_chamfer = format_double(sum_cd / static_cast<double>(split.validation.size()));
      val_emd = format_double(sum_emd / static_cast<double>(n_emd));
    }
    log << r.epoch << ',' << format_double(r.mean_loss) << ',' << val_chamfer << ',' << val_emd
        << '\n';
    log.flush();
    std::cerr << "epoch " << r.epoch << " train_chamfer " << format_double(r.mean_loss)
              << (val_chamfer.empty() ? "" : " val_chamfer " + val_chamfer) << "\n";
  };
  hooks.on_checkpoint = [&](std::size_t, const AEModel& m) { save_model(m, a.out_model); };

  const TrainResult result = train(model, train_set, tc, hooks);
  save_model(model, a.out_model);
  if (!log) throw IoError("failed writing loss log " + log_path.string());
  std::cout << "trained " << result.loss_history.size() << " epochs on " << train_set.size()
            << " clouds";
  if (!result.loss_history.empty()) {
    std::cout << "; chamfer " << format_double(result.loss_history.front()) << " -> "
              << format_double(result.loss_history.back());
  }
  std::cout << "\nmodel: " << a.out_model << "\nloss log: " << log_path.string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string dataset;
  std::string subset = "held-out";
  std::string out;
  double emd_epsilon = kEvalEmdEpsilon;
};

int run_eval(const EvalArgs& a) {
  const AEModel model = load_model(a.model);
  const DatasetManifest manifest = load_manifest(a.dataset);
  if (manifest.point_count != model.config.input_points) {
    throw DimensionError("model expects " + std::to_string(model.config.input_points) +
                         "-point clouds but the dataset has " +
                         std::to_string(manifest.point_count));
  }
  const std::vector<PointCloud> inputs = load_model_inputs(manifest);
  const DatasetSplit split = split_dataset(inputs.size(), model.metadata.validation_fraction,
                                           model.metadata.split_seed);
  std::vector<std::size_t> all(inputs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<std::size_t> evaluated;
  if (a.subset == "all") {
    evaluated = all;
  } else if (a.subset == "train") {
    evaluated = split.train;
  } else {
    evaluated = split.validation.empty() ? all : split.validation;
  }
  const EvalReport report = evaluate(model, manifest, inputs, evaluated, split.train, a.emd_epsilon);
  const std::string text = report_to_json(report);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file(a.out, text);
  }
  return kExitOk;
}

struct EncodeArgs {
  std::string model, input, out;
};

int run_encode(const EncodeArgs& a) {
  const AEModel model = load_model(a.model);
  const PointCloud cloud = normalize(load_cloud(a.input)).cloud;
  save_latent(encode(model, cloud), a.out);
  return kExitOk;
}

struct DecodeArgs {
  std::string model, latent, out;
};

int run_decode(const DecodeArgs& a) {
  const AEModel model = load_model(a.model);
  save_cloud(decode(model, load_latent(a.latent)), a.out);
  return kExitOk;
}

struct InterpArgs {
  std::string model, out, weights;
  std::vector<std::string> latents;
};

int run_interp(const InterpArgs& a) {
  const AEModel model = load_model(a.model);
  std::vector<LatentVector> rows;
  for (const auto& p : a.latents) rows.push_back(load_latent(p));
  const auto weights = split_list<double>(a.weights, to_double);
  save_cloud(decode(model, interpolate(rows, weights)), a.out);
  return kExitOk;
}

struct ServeArgs {
  std::string model, dataset, bind = "127.0.0.1:8080", static_dir;
  std::size_t threads = 16;
};

int run_serve(const ServeArgs& a) {
  auto [host, port] = parse_bind_address(a.bind);
  AEModel model = load_model(a.model);
  DatasetManifest manifest = load_manifest(a.dataset);
  Api api(make_catalog(std::move(model), std::move(manifest)));

  ServerOptions options;
  options.host = host;
  options.port = port;
  options.static_dir = a.static_dir;
  options.threads = a.threads;

  // Signals are handled by a dedicated thread; every other thread inherits
  // the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Server server(api, options);
  const int bound = server.bind();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::cout << "latentcloud: serving on http://" << host << ":" << bound << std::endl;
  server.listen();
  // listen() also returns if the server failed; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "latentcloud: stopped" << std::endl;
  return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (" << e.iterations() << " bids)\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "error: parse failure at line " << e.line() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latentcloud: point-cloud autoencoder design studio"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic shape dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Number of clouds")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--families", gen.families, "Comma-separated families");
  gen_cmd->add_option("--points", gen.points, "Points per cloud")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an autoencoder on a dataset");
  train_cmd->add_option("--dataset", tr.dataset, "Dataset manifest or directory")->required();
  train_cmd->add_option("--out-model", tr.out_model, "Model file to write")->required();
  train_cmd->add_option("--loss-log", tr.loss_log, "Loss CSV (default <out-model>.loss.csv)");
  train_cmd->add_option("--latent", tr.latent, "Latent size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch-size", tr.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.lr, "Learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--beta1", tr.beta1, "Adam beta1")->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--beta2", tr.beta2, "Adam beta2")->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--adam-epsilon", tr.adam_epsilon, "Adam epsilon")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.seed, "Random seed (init, shuffle, split)");
  train_cmd->add_option("--val-split", tr.val_split, "Validation fraction")->check(CLI::Range(0.0, 0.95));
  train_cmd->add_option("--encoder-widths", tr.encoder_widths, "Hidden conv widths, increasing");
  train_cmd->add_option("--decoder-widths", tr.decoder_widths, "Hidden dense widths");
  train_cmd->add_option("--checkpoint-every", tr.checkpoint_every, "Save the model every N epochs");
  train_cmd->add_option("--emd-epsilon", tr.emd_epsilon, "Auction epsilon for validation EMD")
      ->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate reconstructions of a dataset");
  eval_cmd->add_option("--model", ev.model, "Model file")->required();
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset manifest or directory")->required();
  eval_cmd->add_option("--subset", ev.subset, "held-out, train or all")
      ->check(CLI::IsMember({"held-out", "train", "all"}));
  eval_cmd->add_option("--out", ev.out, "Write the JSON report here instead of stdout");
  eval_cmd->add_option("--emd-epsilon", ev.emd_epsilon, "Auction epsilon")->check(CLI::PositiveNumber);

  EncodeArgs en;
  auto* encode_cmd = app.add_subcommand("encode", "Encode a point cloud to a latent file");
  encode_cmd->add_option("--model", en.model, "Model file")->required();
  encode_cmd->add_option("--in", en.input, "Point cloud (.xyz/.txt text or .pcb binary)")->required();
  encode_cmd->add_option("--out", en.out, "Latent file to write")->required();

  DecodeArgs de;
  auto* decode_cmd = app.add_subcommand("decode", "Decode a latent file to a point cloud");
  decode_cmd->add_option("--model", de.model, "Model file")->required();
  decode_cmd->add_option("--latent", de.latent, "Latent file")->required();
  decode_cmd->add_option("--out", de.out, "Point cloud to write")->required();

  InterpArgs in;
  auto* interp_cmd = app.add_subcommand("interp", "Decode a weighted blend of latent files");
  interp_cmd->add_option("--model", in.model, "Model file")->required();
  interp_cmd->add_option("--latents", in.latents, "Latent files (two or more)")
      ->required()
      ->delimiter(',');
  interp_cmd->add_option("--weights", in.weights, "Comma-separated non-negative weights")->required();
  interp_cmd->add_option("--out", in.out, "Point cloud to write")->required();

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the exploration API");
  serve_cmd->add_option("--model", sv.model, "Model file")->envname("LATENTCLOUD_MODEL")->required();
  serve_cmd->add_option("--dataset", sv.dataset, "Dataset manifest or directory")
      ->envname("LATENTCLOUD_DATASET")
      ->required();
  serve_cmd->add_option("--bind", sv.bind, "host:port")->envname("LATENTCLOUD_BIND");
  serve_cmd->add_option("--static", sv.static_dir, "Directory of UI assets to serve at /");
  serve_cmd->add_option("--threads", sv.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*gen_cmd) return guarded([&] { return run_gen_data(gen); });
  if (*train_cmd) return guarded([&] { return run_train(tr); });
  if (*eval_cmd) return guarded([&] { return run_eval(ev); });
  if (*encode_cmd) return guarded([&] { return run_encode(en); });
  if (*decode_cmd) return guarded([&] { return run_decode(de); });
  if (*interp_cmd) return guarded([&] { return run_interp(in); });
  if (*serve_cmd) return guarded([&] { return run_serve(sv); });
  return kExitUsage;
}
