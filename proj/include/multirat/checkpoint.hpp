#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "multirat/marl.hpp"

// Versioned checkpoint files: a text header describing every parameter block,
// followed by little-endian doubles and the trainer RNG state.
namespace multirat::harness {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Length or checksum mismatch, or an unparseable header.
class CheckpointIntegrityError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

class ConfigMismatchError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

struct TeamBlock {
    std::string name;
    std::vector<marl::Agent> agents;
};

struct Checkpoint {
    int version = kCheckpointVersion;
    std::uint32_t config_hash = 0;
    std::vector<TeamBlock> teams;
    std::string rng_state;
};

Checkpoint make_checkpoint(const marl::Team& pens, const marl::Team& rans, std::uint32_t config_hash,
                           std::string rng_state);

// Writes to a sibling temporary file, then renames over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// Checks the hash and copies parameters into teams built from the same
// config. Shape mismatches and (unless allowed) hash mismatches throw.
void apply_checkpoint(const Checkpoint& checkpoint, std::uint32_t expected_hash, bool allow_hash_mismatch,
                      marl::Team& pens, marl::Team& rans);

}  // namespace multirat::harness
