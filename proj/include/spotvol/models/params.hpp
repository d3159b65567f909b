#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "spotvol/errors.hpp"

namespace spotvol::models {

// Square-root diffusion block shared by every model:
//   dV = lambda (theta - V) dt + nu sqrt(V) dW.
// Units: lambda in 1/year, theta and v0 in annualised variance, nu is the
// instantaneous vol-of-vol, rho the spot-vol correlation.
struct HestonParams {
  double lambda = 2.0;
  double theta = 0.04;
  double nu = 0.3;
  double rho = -0.7;
  double v0 = 0.04;

  void validate() const {
    if (!(lambda > 0.0)) throw DomainError("heston: lambda must be > 0");
    if (!(theta > 0.0)) throw DomainError("heston: theta must be > 0");
    if (!(nu > 0.0)) throw DomainError("heston: nu must be > 0");
    if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("heston: rho must be in [-1,1]");
    if (!(v0 > 0.0)) throw DomainError("heston: v0 must be > 0");
  }
};

// Compound-Poisson jumps: price jumps J_S ~ N(mu_s, sigma_s^2), variance
// jumps J_V ~ Exp(mu_v), common intensity eta. mu_v = 0 disables variance
// jumps (Bates).
struct JumpParams {
  double eta = 0.0;
  double mu_s = 0.0;
  double sigma_s = 0.0;
  double mu_v = 0.0;

  void validate() const {
    if (!(eta >= 0.0)) throw DomainError("jumps: eta must be >= 0");
    if (!(sigma_s >= 0.0)) throw DomainError("jumps: sigma_s must be >= 0");
    if (!(mu_v >= 0.0)) throw DomainError("jumps: mu_v must be >= 0");
  }

  // Exact martingale compensator E[e^{J_S}] - 1.
  double price_compensator() const {
    return std::exp(mu_s + 0.5 * sigma_s * sigma_s) - 1.0;
  }
};

struct BatesParams {
  HestonParams diffusion;
  JumpParams jumps;

  void validate() const {
    diffusion.validate();
    jumps.validate();
    if (jumps.mu_v != 0.0) throw DomainError("bates: mu_v must be 0 (no variance jumps)");
  }
};

struct SvcjParams {
  HestonParams diffusion;
  JumpParams jumps;

  void validate() const {
    diffusion.validate();
    jumps.validate();
  }
};

// Rough Heston: the square-root dynamics are driven through the fractional
// kernel t^{alpha-1}/Gamma(alpha) with alpha = hurst + 1/2. alpha is stored
// redundantly and checked; hurst = 1/2 (alpha = 1) is the classical limit.
struct RoughHestonParams {
  HestonParams base;
  double hurst = 0.1;
  double alpha = 0.6;

  void validate() const {
    base.validate();
    if (!(hurst > 0.0 && hurst <= 0.5))
      throw DomainError("rough_heston: hurst must be in (0, 1/2]");
    if (std::abs(alpha - (hurst + 0.5)) > 1e-12)
      throw DomainError("rough_heston: alpha must equal hurst + 1/2");
  }

  static RoughHestonParams make(const HestonParams& base, double hurst) {
    return RoughHestonParams{base, hurst, hurst + 0.5};
  }
};

// Rough Heston together with the multi-factor kernel approximation it is
// priced under (factor count and geometric spacing of the rate grid).
struct LiftedHestonParams {
  RoughHestonParams rough;
  int n_factors = 20;
  double spacing = 2.5;

  void validate() const {
    rough.validate();
    if (n_factors < 1) throw DomainError("lifted_heston: n_factors must be >= 1");
    if (!(spacing > 1.0)) throw DomainError("lifted_heston: spacing must be > 1");
  }
};

using ModelParams = std::variant<HestonParams, BatesParams, SvcjParams,
                                 RoughHestonParams, LiftedHestonParams>;

inline std::string model_label(const ModelParams& params) {
  struct Visitor {
    std::string operator()(const HestonParams&) const { return "heston"; }
    std::string operator()(const BatesParams&) const { return "bates"; }
    std::string operator()(const SvcjParams&) const { return "svcj"; }
    std::string operator()(const RoughHestonParams&) const { return "rough_heston"; }
    std::string operator()(const LiftedHestonParams&) const { return "lifted_heston"; }
  };
  return std::visit(Visitor{}, params);
}

inline void validate(const ModelParams& params) {
  std::visit([](const auto& p) { p.validate(); }, params);
}

inline const HestonParams& diffusion_of(const ModelParams& params) {
  struct Visitor {
    const HestonParams& operator()(const HestonParams& p) const { return p; }
    const HestonParams& operator()(const BatesParams& p) const { return p.diffusion; }
    const HestonParams& operator()(const SvcjParams& p) const { return p.diffusion; }
    const HestonParams& operator()(const RoughHestonParams& p) const { return p.base; }
    const HestonParams& operator()(const LiftedHestonParams& p) const { return p.rough.base; }
  };
  return std::visit(Visitor{}, params);
}

// Parameters with the initial variance replaced; used when the latent state
// is re-estimated day by day.
inline ModelParams with_v0(ModelParams params, double v0) {
  std::visit([&](auto& p) {
    if constexpr (std::is_same_v<std::decay_t<decltype(p)>, HestonParams>)
      p.v0 = v0;
    else if constexpr (std::is_same_v<std::decay_t<decltype(p)>, RoughHestonParams>)
      p.base.v0 = v0;
    else if constexpr (std::is_same_v<std::decay_t<decltype(p)>, LiftedHestonParams>)
      p.rough.base.v0 = v0;
    else
      p.diffusion.v0 = v0;
  }, params);
  return params;
}

// ---- JSON serialisation -------------------------------------------------
// Documented schema: docs/file_formats.md. Units are annualised throughout.

inline nlohmann::json to_json(const ModelParams& params) {
  nlohmann::json j;
  j["model"] = model_label(params);
  const HestonParams& d = diffusion_of(params);
  j["lambda"] = d.lambda;
  j["theta"] = d.theta;
  j["nu"] = d.nu;
  j["rho"] = d.rho;
  j["v0"] = d.v0;
  if (const auto* b = std::get_if<BatesParams>(&params)) {
    j["eta"] = b->jumps.eta;
    j["mu_s"] = b->jumps.mu_s;
    j["sigma_s"] = b->jumps.sigma_s;
  } else if (const auto* s = std::get_if<SvcjParams>(&params)) {
    j["eta"] = s->jumps.eta;
    j["mu_s"] = s->jumps.mu_s;
    j["sigma_s"] = s->jumps.sigma_s;
    j["mu_v"] = s->jumps.mu_v;
  } else if (const auto* r = std::get_if<RoughHestonParams>(&params)) {
    j["hurst"] = r->hurst;
    j["alpha"] = r->alpha;
  } else if (const auto* l = std::get_if<LiftedHestonParams>(&params)) {
    j["hurst"] = l->rough.hurst;
    j["alpha"] = l->rough.alpha;
    j["n_factors"] = l->n_factors;
    j["spacing"] = l->spacing;
  }
  return j;
}

inline ModelParams model_params_from_json(const nlohmann::json& j) {
  if (!j.contains("model")) throw DataError("params json: missing \"model\" tag");
  const std::string tag = j.at("model").get<std::string>();
  if (tag != "heston" && tag != "bates" && tag != "svcj" &&
      tag != "rough_heston" && tag != "lifted_heston")
    throw DataError("params json: unknown model tag \"" + tag + "\"");
  HestonParams d;
  d.lambda = j.at("lambda").get<double>();
  d.theta = j.at("theta").get<double>();
  d.nu = j.at("nu").get<double>();
  d.rho = j.at("rho").get<double>();
  d.v0 = j.at("v0").get<double>();
  ModelParams out;
  if (tag == "heston") {
    out = d;
  } else if (tag == "bates") {
    JumpParams jp;
    jp.eta = j.at("eta").get<double>();
    jp.mu_s = j.at("mu_s").get<double>();
    jp.sigma_s = j.at("sigma_s").get<double>();
    out = BatesParams{d, jp};
  } else if (tag == "svcj") {
    JumpParams jp;
    jp.eta = j.at("eta").get<double>();
    jp.mu_s = j.at("mu_s").get<double>();
    jp.sigma_s = j.at("sigma_s").get<double>();
    jp.mu_v = j.at("mu_v").get<double>();
    out = SvcjParams{d, jp};
  } else if (tag == "rough_heston") {
    out = RoughHestonParams::make(d, j.at("hurst").get<double>());
  } else if (tag == "lifted_heston") {
    LiftedHestonParams l;
    l.rough = RoughHestonParams::make(d, j.at("hurst").get<double>());
    l.n_factors = j.value("n_factors", 20);
    l.spacing = j.value("spacing", 2.5);
    out = l;
  } else {
    throw DataError("params json: unknown model tag \"" + tag + "\"");
  }
  validate(out);
  return out;
}

}  // namespace spotvol::models
