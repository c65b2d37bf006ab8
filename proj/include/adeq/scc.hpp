#pragma once

#include <span>
#include <vector>

namespace adeq {

/// Strongly connected components of a digraph given as adjacency lists.
/// Iterative Tarjan; each component is sorted and components are ordered by
/// their smallest member, so the result does not depend on traversal order.
std::vector<std::vector<int>> strongly_connected_components(
    std::span<const std::vector<int>> adjacency);

}  // namespace adeq
