#include "support.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nd::testing {

namespace fs = std::filesystem;

namespace oracle {

Grid grid_for(const ActivationStore& store, LayerId layer, std::size_t neuron, std::size_t bin_count) {
  Grid grid;
  bool first = true;
  for (std::uint32_t i = 0; i < store.instance_count(); ++i) {
    const double v = store.activation_vector(layer, InstanceId{i})[neuron];
    if (first || v < grid.lo) grid.lo = v;
    if (first || v > grid.hi) grid.hi = v;
    first = false;
  }
  grid.bins = grid.lo == grid.hi ? 1 : bin_count;
  for (std::size_t i = 0; i < grid.bins; ++i) {
    grid.edges.push_back(grid.lo + (grid.hi - grid.lo) * static_cast<double>(i) / static_cast<double>(grid.bins));
  }
  grid.edges.push_back(grid.hi);
  return grid;
}

std::optional<std::size_t> bin_of(const Grid& grid, double value) {
  if (value < grid.lo || value > grid.hi) return std::nullopt;
  std::size_t found = 0;
  for (std::size_t i = 0; i < grid.bins; ++i) {
    if (value >= grid.edges[i]) found = i;
  }
  return found;
}

std::vector<std::uint64_t> counts(const Grid& grid, const std::vector<double>& values) {
  std::vector<std::uint64_t> out(grid.bins, 0);
  for (double v : values) ++out.at(*bin_of(grid, v));
  return out;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto k = static_cast<std::size_t>(h);
  if (k + 1 >= values.size()) return values.back();
  return values[k] + (h - static_cast<double>(k)) * (values[k + 1] - values[k]);
}

std::vector<double> column(const ActivationStore& store, LayerId layer, const std::vector<InstanceId>& ids,
                           std::size_t neuron) {
  std::vector<double> out;
  for (auto id : ids) out.push_back(store.activation_vector(layer, id)[neuron]);
  return out;
}

double divergence(const ActivationStore& store, ClassId cls, const std::vector<LayerId>& layers,
                  const std::vector<std::vector<double>>& values, std::size_t bin_count) {
  const auto members = store.instances_of_class(cls);
  double total = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    double layer_sum = 0.0;
    const auto width = store.neuron_count(layers[l]);
    for (std::size_t n = 0; n < width; ++n) {
      const auto grid = grid_for(store, layers[l], n, bin_count);
      const auto c = counts(grid, column(store, layers[l], members, n));
      const auto peak = *std::max_element(c.begin(), c.end());
      const auto bin = bin_of(grid, values[l][n]);
      double density = 0.0;
      if (bin && peak > 0) density = static_cast<double>(c[*bin]) / static_cast<double>(peak);
      layer_sum += 1.0 - density;
    }
    total += layer_sum / static_cast<double>(width);
  }
  return total / static_cast<double>(layers.size());
}

std::vector<std::size_t> order(const std::vector<double>& keys, bool descending) {
  std::vector<bool> taken(keys.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t round = 0; round < keys.size(); ++round) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (taken[i]) continue;
      if (!best) {
        best = i;
        continue;
      }
      const bool better = descending ? keys[i] > keys[*best] : keys[i] < keys[*best];
      if (better) best = i;
    }
    taken[*best] = true;
    out.push_back(*best);
  }
  return out;
}

}  // namespace oracle

namespace {

const char* const kColors[] = {"#ff7f0e", "#9467bd", "#1f77b4", "#2ca02c", "#8c564b", "#e377c2"};

}  // namespace

ActivationStore random_store(std::mt19937_64& rng, const RandomStoreOptions& options) {
  const auto pick = [&](std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
  };
  Manifest manifest;
  manifest.dataset_name = "random";
  const std::uint32_t layers = pick(1, options.max_layers);
  const std::uint32_t classes = pick(1, options.max_classes);
  const std::uint32_t instances = pick(1, options.max_instances);
  for (std::uint32_t l = 0; l < layers; ++l) {
    manifest.layers.push_back({"layer_" + std::to_string(l), pick(1, options.max_neurons)});
  }
  for (std::uint32_t c = 0; c < classes; ++c) {
    manifest.classes.push_back({"c" + std::to_string(c), kColors[c % std::size(kColors)]});
  }
  for (std::uint32_t i = 0; i < instances; ++i) {
    manifest.instances.push_back({InstanceId{i}, ClassId{pick(0, classes - 1)}, Tag::unspecified, {}, {}});
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<float>> matrices;
  for (const auto& layer : manifest.layers) {
    std::vector<float> matrix(std::size_t{instances} * layer.neuron_count);
    for (std::uint32_t n = 0; n < layer.neuron_count; ++n) {
      const std::uint32_t mode = pick(0, 9);
      const double offset = normal(rng) * 3.0;
      const double scale = std::exp(normal(rng));
      for (std::uint32_t i = 0; i < instances; ++i) {
        double v = 0.0;
        if (mode <= 4) {
          v = offset + scale * normal(rng);
        } else if (mode <= 7) {
          v = static_cast<double>(pick(0, 12)) - 6.0;  // ties and exact edges
        } else if (mode == 8) {
          v = static_cast<double>(pick(0, 8)) / 4.0;
        } else {
          v = offset;  // constant column
        }
        matrix[std::size_t{i} * layer.neuron_count + n] = static_cast<float>(v);
      }
    }
    matrices.push_back(std::move(matrix));
  }
  return ActivationStore(std::move(manifest), std::move(matrices));
}

ActivationStore make_store(const std::vector<std::vector<std::vector<float>>>& layer_rows,
                           const std::vector<std::uint32_t>& classes, std::uint32_t class_count) {
  Manifest manifest;
  manifest.dataset_name = "handmade";
  std::vector<std::vector<float>> matrices;
  for (std::size_t l = 0; l < layer_rows.size(); ++l) {
    const auto& rows = layer_rows[l];
    const auto width = static_cast<std::uint32_t>(rows.empty() ? 1 : rows.front().size());
    manifest.layers.push_back({"layer_" + std::to_string(l), width});
    std::vector<float> matrix;
    for (const auto& row : rows) matrix.insert(matrix.end(), row.begin(), row.end());
    matrices.push_back(std::move(matrix));
  }
  for (std::uint32_t c = 0; c < class_count; ++c) {
    manifest.classes.push_back({"c" + std::to_string(c), kColors[c % std::size(kColors)]});
  }
  for (std::uint32_t i = 0; i < classes.size(); ++i) {
    manifest.instances.push_back({InstanceId{i}, ClassId{classes[i]}, Tag::unspecified, {}, {}});
  }
  return ActivationStore(std::move(manifest), std::move(matrices));
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    path_ = fs::temp_directory_path() / ("nd-test-" + std::to_string(rng()));
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

std::vector<char*> to_argv(std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (auto& arg : args) argv.push_back(arg.data());
  argv.push_back(nullptr);
  return argv;
}

}  // namespace

CommandResult run_cli(const std::vector<std::string>& args) {
  TempDir scratch;
  const fs::path err_path = scratch.path() / "stderr";
  std::vector<std::string> full{cli_path()};
  full.insert(full.end(), args.begin(), args.end());
  auto argv = to_argv(full);

  int pipe_fds[2];
  if (pipe(pipe_fds) != 0) throw std::runtime_error("pipe failed");
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(pipe_fds[1], STDOUT_FILENO);
    const int err_fd = open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    dup2(err_fd, STDERR_FILENO);
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    execv(argv[0], argv.data());
    _exit(127);
  }
  close(pipe_fds[1]);
  CommandResult result;
  char buffer[4096];
  for (ssize_t n; (n = read(pipe_fds[0], buffer, sizeof buffer)) > 0;) result.out.append(buffer, n);
  close(pipe_fds[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.err = read_file(err_path);
  return result;
}

Child::Child(const std::vector<std::string>& args) {
  std::vector<std::string> full = args;
  auto argv = to_argv(full);
  int pipe_fds[2];
  if (pipe(pipe_fds) != 0) throw std::runtime_error("pipe failed");
  pid_ = fork();
  if (pid_ == 0) {
    dup2(pipe_fds[1], STDOUT_FILENO);
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    execv(argv[0], argv.data());
    _exit(127);
  }
  close(pipe_fds[1]);
  out_fd_ = pipe_fds[0];
}

Child::~Child() {
  if (!reaped_ && pid_ > 0) {
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }
  if (out_fd_ >= 0) close(out_fd_);
}

std::optional<std::string> Child::read_line(int timeout_seconds) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{out_fd_, POLLIN, 0};
    if (poll(&pfd, 1, static_cast<int>(left.count())) <= 0) return std::nullopt;
    char chunk[1024];
    const ssize_t n = read(out_fd_, chunk, sizeof chunk);
    if (n <= 0) return std::nullopt;
    buffer_.append(chunk, n);
  }
}

void Child::signal(int sig) { kill(pid_, sig); }

int Child::wait(int timeout_seconds) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
  while (std::chrono::steady_clock::now() < deadline) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      reaped_ = true;
      return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return -1;
}

std::string cli_path() { return ND_CLI_PATH; }
fs::path source_dir() { return ND_SOURCE_DIR; }
fs::path demo_dump() { return source_dir() / "data" / "demo"; }
fs::path golden_dir() { return source_dir() / "tests" / "golden"; }

std::vector<GoldenRequest> golden_requests() {
  std::istringstream lines(read_file(golden_dir() / "requests.txt"));
  std::vector<GoldenRequest> out;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    GoldenRequest request;
    fields >> request.name >> request.status >> request.target;
    out.push_back(std::move(request));
  }
  return out;
}

std::pair<std::string, api::Params> split_target(const std::string& target) {
  const auto q = target.find('?');
  std::pair<std::string, api::Params> out{target.substr(0, q), {}};
  if (q == std::string::npos) return out;
  std::istringstream query(target.substr(q + 1));
  for (std::string pair; std::getline(query, pair, '&');) {
    const auto eq = pair.find('=');
    out.second.emplace(pair.substr(0, eq), eq == std::string::npos ? "" : pair.substr(eq + 1));
  }
  return out;
}

}  // namespace nd::testing
