#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vmot/instance.hpp"

namespace vmot::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitDomainFailure = 1;
inline constexpr int kExitUsage = 2;

// Instance config, schema 1:
//   {"schema": 1,
//    "marginals": [[entry for asset 1, ...] for maturity 1, ...],
//    "payoff": "<expression>", "direction": "min" | "max",
//    "bounds": [["<scalar expression in x>", ...], ...]}      (optional)
// A marginal entry is a file name (JSON or CSV, relative to the config), an
// inline {"points": [...], "weights": [...]}, or {"samples": [...],
// "n_points": k} for quantile quantization.
struct InstanceConfig {
  std::filesystem::path path;
  MarginalSystem system;
  std::string payoff;
  Direction direction = Direction::kMin;
  std::optional<std::vector<std::vector<std::string>>> bounds;
};

// Throws Error(kIo) and the marginal / payoff parse errors.
InstanceConfig load_config(const std::filesystem::path& path);

// Convolves maturity t (1-based) with the three-point law of radius t * eps,
// which preserves convex order and makes every consecutive pair irreducible.
MarginalSystem perturb(const MarginalSystem& system, double eps);

// Entry point for `vmot <subcommand> ...`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vmot::cli
