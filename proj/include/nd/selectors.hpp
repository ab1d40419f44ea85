#pragma once

#include <string_view>
#include <vector>

#include "nd/activation_store.hpp"
#include "nd/distribution.hpp"
#include "nd/query.hpp"

// Text forms of subsets, sort keys and layer lists used in query strings and
// CLI flags. Grammar errors throw MalformedSpec; well-formed references to
// ids that do not exist throw the matching Unknown* error.
//
//   subset    := "class:" NAME | "instance:" ID
//   item      := "median:" NAME | "instance:" ID
//   sort key  := item | "diff:" item "," item
//   direction := "asc" | "desc"
//   layers    := NAME ("," NAME)*
namespace nd::selectors {

InstanceId parse_instance(const ActivationStore& store, std::string_view text);

SubsetSpec parse_subset(const ActivationStore& store, std::string_view text);

SortItem parse_sort_item(const ActivationStore& store, std::string_view text);

SortKey parse_sort_key(const ActivationStore& store, std::string_view text);

Direction parse_direction(std::string_view text);

/// Throws EmptyLayerList for an empty list, DuplicateLayer for repeats.
std::vector<LayerId> parse_layers(const ActivationStore& store, std::string_view text);

}  // namespace nd::selectors
