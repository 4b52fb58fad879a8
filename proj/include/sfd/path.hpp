#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "sfd/errors.hpp"

namespace sfd {

/**
 * Traversal order for a spatial sample: a list of channels, each an ordered
 * list of unit ids. Differencing walks each channel front to back. A unit id
 * appears in at most one channel, at most once.
 */
struct OrderedPath {
  std::vector<std::vector<std::string>> channels;
  // Label of the ordering that produced the path: "x", "y", "WE", "NS",
  // or "theta=<degrees>" for band sampling.
  std::string direction;
  // Band width used by assign_channels; zero for the other orderings.
  double channel_width = 0.0;

  std::size_t unit_count() const {
    std::size_t n = 0;
    for (const auto& ch : channels) n += ch.size();
    return n;
  }

  // Throws IntegrityError if any id appears more than once across channels.
  void check_ids_unique() const {
    std::unordered_set<std::string> seen;
    for (const auto& ch : channels)
      for (const auto& id : ch)
        if (!seen.insert(id).second) throw IntegrityError("path lists unit '" + id + "' more than once");
  }

  // Copy with only the ids in `keep`, preserving channel structure and order.
  // Channels left empty are dropped. Used after transforms that shrink the
  // dataset (spatial lags).
  OrderedPath restricted_to(const std::unordered_set<std::string>& keep) const {
    OrderedPath out;
    out.direction = direction;
    out.channel_width = channel_width;
    for (const auto& ch : channels) {
      std::vector<std::string> kept;
      for (const auto& id : ch)
        if (keep.count(id)) kept.push_back(id);
      if (!kept.empty()) out.channels.push_back(std::move(kept));
    }
    return out;
  }
};

}  // namespace sfd
