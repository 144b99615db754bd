#pragma once

// Bundled sand-casting reference model. The text below is a verbatim copy of
// models/foundry_reference.cmdl (refresh with tools/embed_reference.py).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "castcost/error.hpp"
#include "castcost/model.hpp"
#include "castcost/model_format.hpp"

namespace castcost {

inline constexpr std::string_view kReferenceModelText = R"cmdl(# Sand-casting reference model: steel parts, green-sand molds, resin-bonded cores.
#
# Illustrative values: plausible industrial magnitudes, normative only through
# the oracle fixture (reference_oracle.json). No value is measured plant data.
#
# Every assembly is costed per unit of its own output:
#   core_blowing  one core          mold_making  one mold (cope + drag)
#   moulage       one closed mold   coulee       one raw casting
#   piece_brute   one fettled raw part
#
# "Rendement" is modelled as metal yield (material_yield of liquid_alloy and the
# poured_kg driver). Machine uptime, where relevant, is folded into cycle times.

model "foundry_reference" {
  currency = "eur";

  # Plant-wide rates and sand data.
  param labor_rate_per_h = 38 eur_per_h;
  param sand_margin_dm = 0.8 dm;
  param sand_density_kg_per_dm3 = 1.55 kg_per_dm3;
  param sand_price_eur_per_kg = 0.045 eur_per_kg;
  param sand_yield = 0.97 ratio;
  param core_sand_density_kg_per_dm3 = 1.6 kg_per_dm3;
  param core_sand_price_eur_per_kg = 0.32 eur_per_kg;
  param core_sand_yield = 0.92 ratio;
  param energy_price_eur_per_kwh = 0.14 eur_per_kwh;
  param refractory_eur_per_kg = 0.02 eur_per_kg;

  # Flask volume for one mold holding parts_per_mold parts; the cavities are
  # not filled with sand.
  param flask_volume_dm3 = "parts_per_mold * (part_length_dm + 2 * sand_margin_dm) * (part_width_dm + 2 * sand_margin_dm) * (part_height_dm + 2 * sand_margin_dm)" dm3;
  param cavity_volume_dm3 = "parts_per_mold * part_mass_kg / density" dm3;
  param mold_sand_kg = "(flask_volume_dm3 - cavity_volume_dm3) * sand_density_kg_per_dm3" kg;
  param poured_kg = "part_mass_kg / metal_yield" kg;

  # Quality class (1 standard, 2 improved, 3 critical) to casting scrap rate,
  # piecewise linear between the three table entries.
  param scrap_q1 = 0.03 ratio;
  param scrap_q2 = 0.05 ratio;
  param scrap_q3 = 0.08 ratio;
  param casting_scrap_rate = "scrap_q1 + (scrap_q2 - scrap_q1) * min(max(quality_class - 1, 0), 1) + (scrap_q3 - scrap_q2) * min(max(quality_class - 2, 0), 1)" ratio;

  input part_mass_kg kg;
  input part_length_dm dm;
  input part_width_dm dm;
  input part_height_dm dm;
  input core_volume_dm3 dm3;
  input n_cores count;
  input parts_per_mold count;
  input quality_class class;

  process sand_casting {
  }

  process sand_molding {
    param molding_line_rate_per_h = 95 eur_per_h;
    param molding_cycle_s = 75 s;
    param mold_scrap_rate = 0.015 ratio;
  }

  process core_making {
    param core_shooter_rate_per_h = 55 eur_per_h;
    param core_shot_cycle_s = 40 s;
    param cores_per_shot = 2 count;
    param core_scrap_rate = 0.02 ratio;
  }

  # Melting is plant specific; these are placeholders for an induction shop.
  process melting {
    param labor_rate_per_h = 44 eur_per_h;
    param furnace_rate_per_h = 160 eur_per_h;
    param furnace_throughput_kg_per_h = 900 kg_per_h;
    param melt_crew = 1.5 count;
    param ladle_rate_per_h = 35 eur_per_h;
    param pour_cycle_s = 60 s;
    param pouring_scrap_rate = 0.01 ratio;
    param filter_eur = 0.8 eur;
  }

  process finishing {
    param shakeout_rate_per_h = 70 eur_per_h;
    param shakeout_cycle_s = 45 s;
    param grinding_rate_per_h = 28 eur_per_h;
    param finishing_base_s = 240 s;
    param finishing_s_per_kg = 22 s_per_kg;
    param abrasive_eur_per_kg = 0.09 eur_per_kg;
  }

  material ge240 {
    param density = 7.8 kg_per_dm3;
    param alloy_price_eur_per_kg = 1.05 eur_per_kg;
    param metal_yield = 0.62 ratio;
    param melt_energy_kwh_per_kg = 0.62 kwh_per_kg;
  }

  material g20mn5 {
    param density = 7.8 kg_per_dm3;
    param alloy_price_eur_per_kg = 1.22 eur_per_kg;
    param metal_yield = 0.6 ratio;
    param melt_energy_kwh_per_kg = 0.64 kwh_per_kg;
  }

  material gx5crni19_10 {
    param density = 7.9 kg_per_dm3;
    param alloy_price_eur_per_kg = 3.4 eur_per_kg;
    param metal_yield = 0.55 ratio;
    param melt_energy_kwh_per_kg = 0.7 kwh_per_kg;
  }

  entity melt_energy {
    driver = poured_kg;
    formula = "poured_kg * melt_energy_kwh_per_kg * energy_price_eur_per_kwh";
    category = consumable;
  }

  entity core_coating {
    driver = n_cores;
    formula = "n_cores * parts_per_mold * coating_eur_per_core";
    category = consumable;
  }

  entity abrasives {
    driver = part_mass_kg;
    formula = "part_mass_kg * abrasive_eur_per_kg";
    category = consumable;
  }

  component prepared_sand {
    name = "Prepared green sand";
    kind = purchased;
    quantity_per_output = "mold_sand_kg";
    unit_cost = "sand_price_eur_per_kg";
    material_yield = "sand_yield";
  }

  component core_sand_binder {
    name = "Resin-bonded core sand";
    kind = purchased;
    quantity_per_output = "core_volume_dm3 * core_sand_density_kg_per_dm3";
    unit_cost = "core_sand_price_eur_per_kg";
    material_yield = "core_sand_yield";
  }

  component liquid_alloy {
    name = "Liquid alloy";
    kind = purchased;
    quantity_per_output = "part_mass_kg";
    unit_cost = "alloy_price_eur_per_kg";
    material_yield = "metal_yield";
  }

  component core {
    name = "Core";
    kind = produced;
    quantity_per_output = "n_cores * parts_per_mold";
    sub_assembly = core_blowing;
    material_yield = 1;
  }

  component mold {
    name = "Mold";
    kind = produced;
    quantity_per_output = 1;
    sub_assembly = mold_making;
    material_yield = 1;
  }

  component moulage {
    name = "Closed mold";
    kind = produced;
    quantity_per_output = "1 / parts_per_mold";
    sub_assembly = moulage;
    material_yield = 1;
  }

  component coulee {
    name = "Raw casting";
    kind = produced;
    quantity_per_output = 1;
    sub_assembly = coulee;
    material_yield = 1;
  }

  operation core_shooting {
    name = "Core shooting";
    process = core_making;
    cycle_time_s = "core_shot_cycle_s";
    parts_per_cycle = "cores_per_shot";
    machine_rate_per_h = "core_shooter_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = 1;
    scrap_rate = "core_scrap_rate";
    consumable_cost_per_part = 0.05;
  }

  operation molding {
    name = "Mold making";
    process = sand_molding;
    cycle_time_s = "molding_cycle_s";
    parts_per_cycle = 1;
    machine_rate_per_h = "molding_line_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = 2;
    scrap_rate = "mold_scrap_rate";
    consumable_cost_per_part = 0.35;
  }

  # Core setting and mold closing; one cycle per mold.
  operation remoulage {
    name = "Core setting and closing";
    process = sand_molding;
    cycle_time_s = "close_s + core_setting_s * n_cores * parts_per_mold";
    parts_per_cycle = 1;
    machine_rate_per_h = "closing_station_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = 1;
    scrap_rate = "remoulage_scrap_rate";
    consumable_cost_per_part = 0;
    entities = [core_coating];
    param close_s = 30 s;
    param core_setting_s = 25 s;
    param closing_station_rate_per_h = 25 eur_per_h;
    param remoulage_scrap_rate = 0.005 ratio;
    param coating_eur_per_core = 0.4 eur;
  }

  operation fusion {
    name = "Melting";
    process = melting;
    cycle_time_s = "poured_kg / furnace_throughput_kg_per_h * 3600";
    parts_per_cycle = 1;
    machine_rate_per_h = "furnace_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = "melt_crew";
    scrap_rate = 0;
    consumable_cost_per_part = "poured_kg * refractory_eur_per_kg";
    entities = [melt_energy];
  }

  operation pouring {
    name = "Pouring";
    process = melting;
    cycle_time_s = "pour_cycle_s";
    parts_per_cycle = "parts_per_mold";
    machine_rate_per_h = "ladle_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = 2;
    scrap_rate = "pouring_scrap_rate";
    consumable_cost_per_part = "filter_eur";
  }

  operation shakeout {
    name = "Shakeout";
    process = finishing;
    cycle_time_s = "shakeout_cycle_s";
    parts_per_cycle = "parts_per_mold";
    machine_rate_per_h = "shakeout_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = 1;
    scrap_rate = 0;
    consumable_cost_per_part = 0;
  }

  # Gate removal, grinding and final inspection; casting defects are found here.
  operation finishing {
    name = "Fettling and inspection";
    process = finishing;
    cycle_time_s = "finishing_base_s + finishing_s_per_kg * part_mass_kg";
    parts_per_cycle = 1;
    machine_rate_per_h = "grinding_rate_per_h";
    labor_rate_per_h = "labor_rate_per_h";
    crew_size = 1;
    scrap_rate = "casting_scrap_rate";
    consumable_cost_per_part = 0;
    entities = [abrasives];
  }

  assembly core_blowing {
    name = "Noyautage";
    output = "core";
    components = [core_sand_binder];
    operations = [core_shooting];
  }

  assembly mold_making {
    name = "Mold making";
    output = "mold";
    components = [prepared_sand];
    operations = [molding];
  }

  assembly moulage {
    name = "Moulage";
    output = "closed mold";
    components = [mold, core];
    operations = [remoulage];
  }

  assembly coulee {
    name = "Coulee";
    output = "raw casting";
    components = [moulage, liquid_alloy];
    operations = [fusion, pouring];
  }

  assembly piece_brute {
    name = "Piece brute";
    output = "fettled raw part";
    components = [coulee];
    operations = [shakeout, finishing];
  }

  root = piece_brute;
}
)cmdl";

/// Frozen output of the flat recomputation in tests/oracle for the reference
/// part (also committed as models/reference_oracle.json).
inline constexpr double kReferenceOracleTotal = 53.727244917360224;

struct ReferenceBundle {
  CostModel model;
  PartSpec part;
  SeriesSpec series;
  double target = 0.0;
  double oracle_total = 0.0;
};

inline PartSpec reference_part() {
  PartSpec p;
  p.process_id = "sand_casting";
  p.material_id = "ge240";
  p.params = {{"part_mass_kg", 12.5},   {"part_length_dm", 3.2}, {"part_width_dm", 2.0},
              {"part_height_dm", 1.4},  {"core_volume_dm3", 0.35}, {"n_cores", 2.0},
              {"parts_per_mold", 2.0},  {"quality_class", 2.0}};
  return p;
}

inline ReferenceBundle build_reference_model() {
  ModelDocument doc = parse_model(kReferenceModelText);
  if (!doc.diagnostics.empty()) {
    throw Error(ErrorCode::invalid_model, "reference model: " + doc.diagnostics.front().message,
                doc.diagnostics.front().location);
  }
  ReferenceBundle b;
  b.model = std::move(doc.model);
  b.part = reference_part();
  // Pattern plate plus core box, over an order of 2000 parts.
  b.series = SeriesSpec{2000, 18000.0};
  b.target = 61.5;
  b.oracle_total = kReferenceOracleTotal;
  return b;
}

/// A design or process knob offered to the workbench. Numeric levers carry a
/// plausible range; choice levers (alloy_id) list their options instead.
struct Lever {
  std::string name;
  std::string description;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;

  bool is_choice() const { return !choices.empty(); }
  bool operator==(const Lever&) const = default;
};

inline std::vector<Lever> reference_levers() {
  return {
      {"n_cores", "Cores per part, set by the parting line choice", 0, 8, {}},
      {"parts_per_mold", "Parts per mold (cluster size)", 1, 8, {}},
      {"quality_class", "Expected quality class: 1 standard, 2 improved, 3 critical", 1, 3, {}},
      {"casting_scrap_rate", "Casting scrap found at fettling and inspection", 0, 0.3, {}},
      {"mold_scrap_rate", "Scrapped molds at the molding line", 0, 0.2, {}},
      {"core_scrap_rate", "Scrapped cores at core shooting", 0, 0.2, {}},
      {"pouring_scrap_rate", "Molds lost at pouring", 0, 0.2, {}},
      {"alloy_id", "Alloy grade (part material)", 0, 0, {"ge240", "g20mn5", "gx5crni19_10"}},
  };
}

/// The reference levers that make sense for `model`: numeric levers that name
/// an input or a parameter somewhere in it, and alloy_id over its materials.
inline std::vector<Lever> model_levers(const CostModel& model) {
  std::vector<Lever> out;
  for (Lever l : reference_levers()) {
    if (l.is_choice()) {
      if (model.materials.empty()) continue;
      l.choices.clear();
      for (const auto& m : model.materials) l.choices.push_back(m.id);
      out.push_back(std::move(l));
      continue;
    }
    bool known = is_input(model, l.name) || find_parameter(model.globals, l.name);
    for (const auto& s : model.processes) known = known || find_parameter(s.params, l.name);
    for (const auto& s : model.materials) known = known || find_parameter(s.params, l.name);
    for (const auto& op : model.operations) known = known || find_parameter(op.params, l.name);
    if (known) out.push_back(std::move(l));
  }
  return out;
}

}  // namespace castcost
