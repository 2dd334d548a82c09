#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace relu_prism::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitTrainingDiverged = 3;

// Environment variable holding the default training seed.
inline constexpr const char* kSeedEnvVar = "RELU_PRISM_SEED";

// Entry point shared by the executable and the tests. `args` excludes the
// program name, e.g. {"simulate", "--seed", "1", "--out", "runs/a"}.
//
// Subcommands:
//   simulate  Boolean dataset -> train -> partition -> explain -> verify
//   titanic   Titanic csv     -> train -> partition -> explain -> verify
//   verify    check a saved network (and optionally its clusters) on a dataset
//   rerun     replay the command recorded in a manifest.json
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace relu_prism::cli
