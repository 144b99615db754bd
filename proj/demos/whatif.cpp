// Design-to-cost loop on the reference part: raise parts per mold until the
// amortized cost meets the target, then show what dropping one core saves.

#include <cstdio>

#include "castcost/castcost.hpp"

int main() {
  auto bundle = castcost::build_reference_model();
  const auto& model = bundle.model;

  for (double ppm = 1; ppm <= 8; ++ppm) {
    castcost::Scenario s{"ppm", "parts per mold", {{"parts_per_mold", ppm}}, std::nullopt};
    double total = castcost::compute_part_cost(model, bundle.part, &s).subtotal;
    double ratio = castcost::target_indicator(castcost::amortize_series(total, bundle.series), bundle.target);
    std::printf("parts_per_mold %.0f  total %s  cost/target %.4f%s\n", ppm,
                castcost::format_amount(total).c_str(), ratio, ratio < 1 ? "  <- on target" : "");
    if (ratio < 1) break;
  }

  castcost::Scenario fewer_cores{"one_core", "one core per part", {{"n_cores", 1}}, std::nullopt};
  auto result = castcost::whatif(model, bundle.part, {fewer_cores});
  std::fputs(castcost::whatif_json(result).c_str(), stdout);
}
