#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "basedlab/quant.hpp"
#include "basedlab/sim.hpp"

namespace basedlab::scenario {

struct Scenario {
  sim::NetworkConfig network;
  double years = 1.0;
  quant::SqueezeParams quant;

  std::int64_t blocks() const;
};

/// Strict reader: unknown keys and ill-typed values raise ValidationError
/// carrying the offending field path (e.g. "peers[2].role").
Scenario parse(const nlohmann::json& doc);
Scenario load(const std::filesystem::path& path);

}  // namespace basedlab::scenario
