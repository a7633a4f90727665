#pragma once

#include <string>
#include <string_view>

#include "network.hpp"
#include "scenario.hpp"

namespace storval {

inline constexpr std::string_view kNetworkSchema = "storval-net/1";
inline constexpr std::string_view kTreeSchema = "storval-tree/1";

// Parsers throw ParseError with the 1-based line number of the offending
// record; the resulting objects are validated before they are returned.
Network parse_network(std::string_view text, const std::string& source = "<network>");
ScenarioTree parse_tree(std::string_view text, const std::string& source = "<tree>",
                        std::size_t node_budget = ScenarioTree::kDefaultNodeBudget);

Network load_network(const std::string& path);
ScenarioTree load_tree(const std::string& path, std::size_t node_budget = ScenarioTree::kDefaultNodeBudget);

// Writers use 17 significant digits so a parse of the output reproduces every
// value bit for bit.
std::string format_network(const Network& net);
std::string format_tree(const ScenarioTree& tree);

std::string format_double(double value);

}  // namespace storval
