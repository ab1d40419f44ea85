// nd: validate activation dumps, serve the query API, score divergence, run
// ROC sweeps and generate the synthetic benchmark dump.

#include <pthread.h>
#include <signal.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nd/activation_store.hpp"
#include "nd/api.hpp"
#include "nd/divergence.hpp"
#include "nd/error.hpp"
#include "nd/json_io.hpp"
#include "nd/selectors.hpp"
#include "nd/synth.hpp"

namespace {

constexpr int kUserError = 2;

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

// "1,2,3", whitespace also accepted; "@path" reads the list from a file.
std::vector<nd::InstanceId> parse_id_list(const nd::ActivationStore& store, const std::string& text) {
  std::string content = text;
  if (!text.empty() && text.front() == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw nd::Error(nd::ErrorCode::MissingFile, "cannot open id list " + text.substr(1));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    content = buffer.str();
  }
  for (char& c : content) {
    if (c == ',' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  std::vector<nd::InstanceId> ids;
  std::istringstream tokens(content);
  for (std::string token; tokens >> token;) ids.push_back(nd::selectors::parse_instance(store, token));
  return ids;
}

nd::DivergenceParams divergence_params(const nd::ActivationStore& store, const std::string& layers,
                                       std::size_t bins) {
  auto params = nd::default_divergence_params(store);
  if (!layers.empty()) params.layers = nd::selectors::parse_layers(store, layers);
  params.distribution.bin_count = bins;
  return params;
}

int run_validate(const std::string& dump_dir) {
  const auto store = nd::ActivationStore::ingest(dump_dir);
  const auto& manifest = store.manifest();
  std::size_t tags[3] = {0, 0, 0};
  for (const auto& inst : manifest.instances) ++tags[static_cast<int>(inst.tag)];

  std::cout << "dataset: " << manifest.dataset_name << '\n';
  std::cout << "layers: " << manifest.layers.size() << '\n';
  for (const auto& layer : manifest.layers) {
    std::cout << "  " << layer.name << ": " << layer.neuron_count << " neurons\n";
  }
  std::cout << "classes: " << manifest.classes.size() << '\n';
  for (std::uint32_t c = 0; c < manifest.classes.size(); ++c) {
    std::cout << "  " << manifest.classes[c].name << " " << manifest.classes[c].color << ": "
              << store.instances_of_class(nd::ClassId{c}).size() << " instances\n";
  }
  std::cout << "instances: " << manifest.instances.size() << " (benign " << tags[0] << ", adversarial "
            << tags[1] << ", unspecified " << tags[2] << ")\n";
  return 0;
}

int run_serve(const std::string& data_dir, const std::string& host, int port, const std::string& ui_dir,
              std::size_t bins) {
  // Handle signals on a dedicated thread; workers inherit the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  nd::api::Service service(nd::DistributionConfig{bins});
  service.load(data_dir);

  std::optional<std::filesystem::path> ui;
  if (!ui_dir.empty()) ui = ui_dir;
  nd::api::HttpServer server(service, ui);
  if (!server.bind(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << " (address in use?)\n";
    return kUserError;
  }

  std::thread signal_thread([&] {
    for (;;) {
      int sig = 0;
      if (sigwait(&signals, &sig) != 0) continue;
      if (sig == SIGHUP) {
        try {
          service.load(data_dir);
          std::cerr << "reloaded " << data_dir << '\n';
        } catch (const nd::Error& e) {
          std::cerr << "reload failed, keeping previous dataset: " << e.what() << '\n';
        }
        continue;
      }
      server.stop();
      return;
    }
  });

  std::cout << "serving " << service.dataset()->store.manifest().dataset_name << " at http://" << host << ":"
            << server.port() << "/" << std::endl;
  const bool clean = server.listen();
  pthread_kill(signal_thread.native_handle(), SIGTERM);
  signal_thread.join();
  std::cout << "shut down" << std::endl;
  return clean ? 0 : kUserError;
}

int run_score(const std::string& data_dir, const std::string& instance, const std::string& class_name,
              const std::string& layers, std::size_t bins) {
  const auto store = nd::ActivationStore::ingest(data_dir);
  const auto id = nd::selectors::parse_instance(store, instance);
  const auto cls = store.class_id(class_name);
  const auto report = nd::score_instance(store, id, cls, divergence_params(store, layers, bins));
  std::cout << nd::json_io::body(nd::json_io::divergence_report(store, report));
  return 0;
}

int run_sweep(const std::string& data_dir, const std::string& benign_text, const std::string& attacked_text,
              std::size_t grid, const std::string& layers, std::size_t bins, bool as_json) {
  const auto store = nd::ActivationStore::ingest(data_dir);
  std::vector<nd::InstanceId> benign;
  std::vector<nd::InstanceId> attacked;
  if (benign_text.empty() || attacked_text.empty()) {
    for (const auto& inst : store.manifest().instances) {
      (inst.tag == nd::Tag::adversarial ? attacked : benign).push_back(inst.id);
    }
  }
  if (!benign_text.empty()) benign = parse_id_list(store, benign_text);
  if (!attacked_text.empty()) attacked = parse_id_list(store, attacked_text);

  const auto thresholds = nd::uniform_thresholds(grid);
  const auto table = nd::sweep(store, benign, attacked, nd::manifest_classes(store),
                               divergence_params(store, layers, bins), thresholds);
  if (as_json) {
    std::cout << nd::json_io::body(nd::json_io::roc_table(table));
    return 0;
  }
  std::cout << "threshold,tpr,fpr\n";
  for (const auto& p : table.points) {
    std::cout << format_double(p.threshold) << ',' << format_double(p.tpr) << ',' << format_double(p.fpr) << '\n';
  }
  std::cout << "# benign=" << benign.size() << " attacked=" << attacked.size() << '\n';
  std::cout << "# auc=" << format_double(table.auc) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuron activation distributions and divergence scoring"};
  app.require_subcommand(1);

  std::string dump_dir;
  auto* validate = app.add_subcommand("validate", "Ingest a dump directory and print a summary");
  validate->add_option("dump-dir", dump_dir, "Dump directory")->required();

  std::string data_dir;
  std::size_t bins = nd::kDefaultBinCount;
  const auto add_data_dir = [&](CLI::App* sub) {
    sub->add_option("--data-dir", data_dir, "Dump directory")->envname("ND_DATA_DIR")->required();
    sub->add_option("--bins", bins, "Bins per neuron")->check(CLI::PositiveNumber);
  };

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  add_data_dir(serve);
  serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--ui-dir", ui_dir, "Built UI assets served at /");

  std::string instance;
  std::string class_name;
  std::string layers;
  auto* score = app.add_subcommand("score", "Divergence of one instance from a class");
  add_data_dir(score);
  score->add_option("--instance", instance, "Instance id")->required();
  score->add_option("--class", class_name, "Class name")->required();
  score->add_option("--layers", layers, "Comma-separated layers (default: last two)");

  std::string benign_list;
  std::string attacked_list;
  std::size_t grid = 101;
  bool as_json = false;
  auto* sweep = app.add_subcommand("sweep", "ROC sweep of divergence-based detection");
  add_data_dir(sweep);
  sweep->add_option("--benign", benign_list, "Benign ids (list or @file; default: non-adversarial)");
  sweep->add_option("--attacked", attacked_list, "Attacked ids (list or @file; default: adversarial)");
  sweep->add_option("--grid", grid, "Number of thresholds over [0, 1]")->check(CLI::Range(2, 1000000));
  sweep->add_option("--layers", layers, "Comma-separated layers (default: last two)");
  sweep->add_flag("--json", as_json, "Print JSON instead of CSV");

  std::string out_dir;
  nd::SynthConfig synth_config;
  int pairs = -1;
  bool no_thumbnails = false;
  auto* synth = app.add_subcommand("synth", "Write the synthetic Gaussian benchmark dump");
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--classes", synth_config.classes, "Number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--neurons", synth_config.neurons, "Neurons per layer")->check(CLI::PositiveNumber);
  synth->add_option("--instances", synth_config.instances, "Instances per class")->check(CLI::PositiveNumber);
  synth->add_option("--sep", synth_config.separation, "Class mean separation in sigmas")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_config.seed, "Random seed");
  synth->add_option("--pairs", pairs, "Benign/adversarial pairs per class (default: instances/2)")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--layers", synth_config.layers, "Number of layers")->check(CLI::PositiveNumber);
  synth->add_flag("--no-thumbnails", no_thumbnails, "Skip thumbnail images");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    if (*validate) return run_validate(dump_dir);
    if (*serve) return run_serve(data_dir, host, port, ui_dir, bins);
    if (*score) return run_score(data_dir, instance, class_name, layers, bins);
    if (*sweep) return run_sweep(data_dir, benign_list, attacked_list, grid, layers, bins, as_json);
    if (*synth) {
      synth_config.pairs = pairs >= 0 ? static_cast<std::uint32_t>(pairs) : synth_config.instances / 2;
      synth_config.thumbnails = !no_thumbnails;
      nd::write_synthetic(out_dir, nd::generate_synthetic(synth_config));
      std::cout << "wrote " << out_dir << '\n';
      return 0;
    }
  } catch (const nd::Error& e) {
    std::cerr << "error: " << nd::to_string(e.code()) << ": " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUserError;
  }
  return 0;
}
