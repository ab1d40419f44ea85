#include "nd/selectors.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "nd/error.hpp"

namespace nd::selectors {

namespace {

[[noreturn]] void malformed(std::string_view what, std::string_view text) {
  throw Error(ErrorCode::MalformedSpec, std::string(what) + ": '" + std::string(text) + "'");
}

bool strip_prefix(std::string_view& text, std::string_view prefix) {
  if (!text.starts_with(prefix)) return false;
  text.remove_prefix(prefix.size());
  return true;
}

}  // namespace

InstanceId parse_instance(const ActivationStore& store, std::string_view text) {
  std::uint32_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    if (ec == std::errc::result_out_of_range) {
      throw Error(ErrorCode::UnknownInstance, "unknown instance id " + std::string(text));
    }
    malformed("instance id must be a non-negative integer", text);
  }
  const InstanceId id{value};
  store.check(id);
  return id;
}

SubsetSpec parse_subset(const ActivationStore& store, std::string_view text) {
  std::string_view rest = text;
  if (strip_prefix(rest, "class:")) {
    if (rest.empty()) malformed("class name missing", text);
    return ClassSubset{store.class_id(rest)};
  }
  if (strip_prefix(rest, "instance:")) return SingleSubset{parse_instance(store, rest)};
  malformed("subset must be class:<name> or instance:<id>", text);
}

SortItem parse_sort_item(const ActivationStore& store, std::string_view text) {
  std::string_view rest = text;
  if (strip_prefix(rest, "median:")) {
    if (rest.empty()) malformed("class name missing", text);
    return ClassMedianItem{store.class_id(rest)};
  }
  if (strip_prefix(rest, "instance:")) return InstanceItem{parse_instance(store, rest)};
  malformed("sort item must be median:<class> or instance:<id>", text);
}

SortKey parse_sort_key(const ActivationStore& store, std::string_view text) {
  std::string_view rest = text;
  if (!strip_prefix(rest, "diff:")) return parse_sort_item(store, text);
  // Split at the last comma that starts an item so class names may
  // themselves contain commas.
  const auto median_at = rest.rfind(",median:");
  const auto instance_at = rest.rfind(",instance:");
  std::size_t pos = std::string_view::npos;
  if (median_at != std::string_view::npos) pos = median_at;
  if (instance_at != std::string_view::npos && (pos == std::string_view::npos || instance_at > pos)) {
    pos = instance_at;
  }
  if (pos != std::string_view::npos) {
    return DifferenceKey{parse_sort_item(store, rest.substr(0, pos)),
                         parse_sort_item(store, rest.substr(pos + 1))};
  }
  malformed("diff key must be diff:<item>,<item>", text);
}

Direction parse_direction(std::string_view text) {
  if (text == "desc") return Direction::descending;
  if (text == "asc") return Direction::ascending;
  malformed("direction must be asc or desc", text);
}

std::vector<LayerId> parse_layers(const ActivationStore& store, std::string_view text) {
  std::vector<LayerId> layers;
  if (text.empty()) throw Error(ErrorCode::EmptyLayerList, "layer list is empty");
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto name = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    if (name.empty()) malformed("empty layer name in list", text);
    const LayerId id = store.layer_id(name);
    if (std::find(layers.begin(), layers.end(), id) != layers.end()) {
      throw Error(ErrorCode::DuplicateLayer, "layer '" + std::string(name) + "' listed twice");
    }
    layers.push_back(id);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return layers;
}

}  // namespace nd::selectors
