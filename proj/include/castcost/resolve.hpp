#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "castcost/error.hpp"
#include "castcost/expr.hpp"
#include "castcost/model.hpp"

namespace castcost {

/// Numeric layers above the model's own scopes, highest precedence first
/// (typically scenario, then part).
using Overlays = std::vector<const ParamMap*>;

inline constexpr int kMaxParameterDepth = 32;

inline std::string describe(const ContextPath& ctx) {
  std::string s = ctx.process_id;
  if (ctx.material_id) s += "/" + *ctx.material_id;
  if (ctx.feature_id) s += "/" + *ctx.feature_id;
  return s;
}

/// Resolves parameter names at one node of the context tree.
///
/// Precedence, high to low: overlays (in order), feature, material, process,
/// global. Expression-valued parameters are evaluated in this same resolver,
/// so an overlay can replace any input of a derived parameter.
class Resolver {
 public:
  Resolver(const CostModel& model, ContextPath ctx, Overlays overlays)
      : model_(model), ctx_(std::move(ctx)), overlays_(std::move(overlays)) {
    process_ = find_process(model_, ctx_.process_id);
    if (!process_) {
      throw Error(ErrorCode::unknown_context, "unknown process '" + ctx_.process_id + "'");
    }
    if (ctx_.material_id) {
      material_ = find_material(model_, *ctx_.material_id);
      if (!material_) {
        throw Error(ErrorCode::unknown_context, "unknown material '" + *ctx_.material_id + "'");
      }
    }
    if (ctx_.feature_id) {
      if (!ctx_.material_id) {
        throw Error(ErrorCode::unknown_context, "feature context requires a material");
      }
      feature_ = find_operation(model_, *ctx_.feature_id);
      if (!feature_) {
        throw Error(ErrorCode::unknown_context, "unknown feature '" + *ctx_.feature_id + "'");
      }
    }
  }

  const ContextPath& context() const { return ctx_; }

  double resolve(std::string_view name) const {
    std::vector<std::string> chain;
    return resolve_in_chain(name, chain);
  }

  double evaluate(const Expr& e) const {
    std::vector<std::string> chain;
    return evaluate_in_chain(e, chain);
  }

 private:
  double evaluate_in_chain(const Expr& e, std::vector<std::string>& chain) const {
    return castcost::evaluate(
        e, [&](std::string_view name) { return resolve_in_chain(name, chain); });
  }

  double resolve_in_chain(std::string_view name, std::vector<std::string>& chain) const {
    for (const ParamMap* layer : overlays_) {
      if (!layer) continue;
      if (auto it = layer->find(name); it != layer->end()) return it->second;
    }
    const Parameter* p = nullptr;
    if (feature_) p = find_parameter(feature_->params, name);
    if (!p && material_) p = find_parameter(material_->params, name);
    if (!p) p = find_parameter(process_->params, name);
    if (!p) p = find_parameter(model_.globals, name);
    if (!p) {
      throw Error(ErrorCode::unresolved_parameter,
                  "unresolved parameter '" + std::string(name) + "' in context " + describe(ctx_));
    }
    if (const double* literal = std::get_if<double>(&p->value)) return *literal;

    bool repeated = std::find(chain.begin(), chain.end(), name) != chain.end();
    if (repeated || chain.size() >= static_cast<std::size_t>(kMaxParameterDepth)) {
      std::string msg = "cyclic parameter reference ";
      for (const auto& n : chain) msg += n + " -> ";
      msg += std::string(name);
      throw Error(ErrorCode::cyclic_parameter, msg);
    }
    chain.emplace_back(name);
    double v = evaluate_in_chain(std::get<Expr>(p->value), chain);
    chain.pop_back();
    return v;
  }

  const CostModel& model_;
  ContextPath ctx_;
  Overlays overlays_;
  const ScopeOwner* process_ = nullptr;
  const ScopeOwner* material_ = nullptr;
  const Operation* feature_ = nullptr;
};

inline double resolve_parameter(const CostModel& model, std::string_view name,
                                const ContextPath& ctx, const Overlays& overlays) {
  return Resolver(model, ctx, overlays).resolve(name);
}

inline double entity_cost(const CostModel& model, const CostEntity& entity, const ContextPath& ctx,
                          const Overlays& overlays) {
  if (!entity.formula) {
    throw Error(ErrorCode::invalid_model, "entity '" + entity.id + "' has no formula");
  }
  return Resolver(model, ctx, overlays).evaluate(*entity.formula);
}

/// Overlay layers for a part: scenario overrides above the part parameters.
inline Overlays part_overlays(const PartSpec& part) { return {&part.scenario, &part.params}; }

}  // namespace castcost
