#pragma once

// Seeded samplers for the four growth dynamics, their exact one-step law,
// and the expected degree-count recursion of the Buckley-Osthus model.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pafit/graph_core.hpp"

namespace pafit {

enum class Model { LCD, BO, HPAM, GENERAL_F };

const char* model_name(Model model) noexcept;
/// Accepts the canonical names (LCD, BO, HPAM, GENERAL_F) and the CLI
/// spellings (lcd, bo, hpam, general).
Model model_from_name(std::string_view name);

struct SimConfig {
  Model model = Model::BO;
  std::uint64_t n = 1;
  std::uint64_t seed = 0;
  std::optional<double> bo_a;        // BO, GENERAL_F
  std::optional<double> delta;       // GENERAL_F
  std::optional<HpamParams> hpam;    // HPAM

  void validate() const;
};

GrowthHistory simulate_lcd(std::uint64_t n, std::uint64_t seed);
/// a >= 1: O(1) per step by splitting d + a - 1 into an edge-endpoint draw
/// and a uniform-node draw. a < 1: cumulative-sum tree over d + a - 1.
GrowthHistory simulate_bo(std::uint64_t n, double a, std::uint64_t seed);
/// Node 1 is a forced self-loop whose membership is drawn from pi.
GrowthHistory simulate_hpam(std::uint64_t n, const HpamParams& params, std::uint64_t seed);
/// Attachment weight f(d) + a - 1 with f(d) = d^delta.
GrowthHistory simulate_general_f(std::uint64_t n, double a, double delta, std::uint64_t seed);
GrowthHistory simulate(const SimConfig& config);

/// Exact conditional probability that `event` is the next arrival after
/// `prefix`. For HPAM this includes the pi factor of the arriving node.
double step_probability(const GrowthHistory& prefix, const AttachEvent& event, const SimConfig& config);

/// Every event that can follow `prefix` under `config` (HPAM: all labels x targets).
std::vector<AttachEvent> legal_next_events(const GrowthHistory& prefix, const SimConfig& config);

/// prefix followed by event, with K communities.
GrowthHistory append_event(const GrowthHistory& prefix, const AttachEvent& event, Community K);

/// E Z_k^n by forward iteration of the expected-count recursions from
/// N_2^1 = 1. Result is indexed by degree, k = 0..n+1 (entry 0 is 0).
std::vector<double> expected_degree_counts_bo(std::uint64_t n, double a);

}  // namespace pafit
