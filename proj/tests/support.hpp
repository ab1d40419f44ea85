#pragma once

// Test-only helpers: independent brute-force oracles, random store
// generation, temp directories, subprocess control and golden files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nd/activation_store.hpp"
#include "nd/api.hpp"

namespace nd::testing {

// ---------------------------------------------------------------------------
// Oracles. Written without touching the engine code paths they check.
namespace oracle {

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t bins = 1;
  std::vector<double> edges;
};

/// Naive min/max scan of one neuron over every instance.
Grid grid_for(const ActivationStore& store, LayerId layer, std::size_t neuron, std::size_t bin_count);

/// Linear scan over the edges: last bin whose left edge is <= value; the top
/// edge belongs to the last bin. nullopt when off the grid.
std::optional<std::size_t> bin_of(const Grid& grid, double value);

std::vector<std::uint64_t> counts(const Grid& grid, const std::vector<double>& values);

/// Plain sort; odd -> middle element, even -> mean of the central pair.
double median(std::vector<double> values);

/// x[k] + (h - k) * (x[k+1] - x[k]) with h = p (n - 1).
double quantile(std::vector<double> values, double p);

std::vector<double> column(const ActivationStore& store, LayerId layer, const std::vector<InstanceId>& ids,
                           std::size_t neuron);

/// Mean over layers of the mean over neurons of 1 - density, where density
/// is the class's bin count over its largest bin count (0 for an empty class)
/// and values off the grid score 1.
double divergence(const ActivationStore& store, ClassId cls, const std::vector<LayerId>& layers,
                  const std::vector<std::vector<double>>& values, std::size_t bin_count);

/// Selection sort: repeatedly take the best remaining key, lowest index first
/// on ties.
std::vector<std::size_t> order(const std::vector<double>& keys, bool descending);

}  // namespace oracle

// ---------------------------------------------------------------------------
struct RandomStoreOptions {
  std::uint32_t max_layers = 2;
  std::uint32_t max_neurons = 8;
  std::uint32_t max_instances = 200;
  std::uint32_t max_classes = 4;
};

/// Random store mixing continuous values, small-integer values (ties, values
/// on bin edges) and occasional constant columns.
ActivationStore random_store(std::mt19937_64& rng, const RandomStoreOptions& options = {});

/// Store from explicit per-layer rows; instance i has class classes[i].
ActivationStore make_store(const std::vector<std::vector<std::vector<float>>>& layer_rows,
                           const std::vector<std::uint32_t>& classes, std::uint32_t class_count);

// ---------------------------------------------------------------------------
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the nd CLI with `args` and captures its output.
CommandResult run_cli(const std::vector<std::string>& args);

/// A long-running child process (used for `nd serve`).
class Child {
 public:
  explicit Child(const std::vector<std::string>& argv);
  ~Child();
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  /// Reads one line of stdout (blocking, with a timeout in seconds).
  std::optional<std::string> read_line(int timeout_seconds = 10);
  void signal(int sig);
  /// Waits for exit; returns the exit code (or -1 on timeout).
  int wait(int timeout_seconds = 10);

 private:
  int pid_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool reaped_ = false;
};

std::string cli_path();
std::filesystem::path source_dir();
std::filesystem::path demo_dump();
std::filesystem::path golden_dir();

// ---------------------------------------------------------------------------
struct GoldenRequest {
  std::string name;
  int status = 200;
  std::string target;  // path?query
};

std::vector<GoldenRequest> golden_requests();

/// Splits "path?a=1&b=2" into path and params (no percent-decoding needed
/// for the targets used in tests).
std::pair<std::string, api::Params> split_target(const std::string& target);

}  // namespace nd::testing
