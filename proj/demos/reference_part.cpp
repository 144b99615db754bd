// Prices the bundled reference part and prints the top of its breakdown.

#include <cstdio>

#include "castcost/castcost.hpp"

namespace {

void print_tree(const castcost::CostBreakdown& node, int depth, int max_depth) {
  std::printf("%*s%-*s %12s\n", depth * 2, "", 28 - depth * 2, node.label.c_str(),
              castcost::format_amount(node.subtotal).c_str());
  if (depth == max_depth) return;
  for (const auto& child : node.children) {
    if (auto* n = std::get_if<castcost::CostBreakdown>(&child)) print_tree(*n, depth + 1, max_depth);
  }
}

}  // namespace

int main() {
  auto bundle = castcost::build_reference_model();
  auto breakdown = castcost::compute_part_cost(bundle.model, bundle.part);
  print_tree(breakdown, 0, 3);

  double amortized = castcost::amortize_series(breakdown.subtotal, bundle.series);
  std::printf("\ndirect cost per part     %s %s\n", castcost::format_amount(breakdown.subtotal).c_str(),
              bundle.model.currency.c_str());
  std::printf("with tooling (%lld parts) %s %s\n", bundle.series.quantity,
              castcost::format_amount(amortized).c_str(), bundle.model.currency.c_str());
  std::printf("cost / target            %.4f\n", castcost::target_indicator(amortized, bundle.target));
  for (const auto& [cat, value] : breakdown.category_totals) {
    std::printf("  %-12s %12s\n", std::string(castcost::to_string(cat)).c_str(),
                castcost::format_amount(value).c_str());
  }
}
