#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace nd {

/// Index into one of the manifest's ordered universes (layers, classes or
/// instances). Distinct tag types keep the three from being mixed up.
template <typename Tag>
struct Id {
  std::uint32_t value{};

  constexpr auto operator<=>(const Id&) const = default;
};

using LayerId = Id<struct LayerTag>;
using ClassId = Id<struct ClassTag>;
using InstanceId = Id<struct InstanceTag>;

}  // namespace nd

template <typename Tag>
struct std::hash<nd::Id<Tag>> {
  std::size_t operator()(const nd::Id<Tag>& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
