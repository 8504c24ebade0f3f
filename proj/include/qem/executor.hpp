#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qem/circuit.hpp"
#include "qem/noisy_sim.hpp"

namespace qem {

// Executor contract: a batch of circuits plus a shot count in, one counts
// table per circuit out.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual std::vector<CountsTable> run(std::span<const Circuit> circuits,
                                       std::int64_t shots) = 0;
};

// Built-in density-matrix backend. A global circuit counter feeds the seed
// derivation, so splitting a circuit sequence into batches differently does
// not change any result.
class SimExecutor : public Executor {
 public:
  SimExecutor(NoiseSpec noise, std::uint64_t seed, SimOptions options = {})
      : noise_(std::move(noise)), seed_(seed), options_(options) {}

  std::vector<CountsTable> run(std::span<const Circuit> circuits,
                               std::int64_t shots) override;

  const NoiseSpec& noise() const { return noise_; }

 private:
  NoiseSpec noise_;
  std::uint64_t seed_;
  SimOptions options_;
  std::uint64_t counter_ = 0;
};

// File adapter: writes batch_NNN.json into a directory and expects a matching
// counts_NNN.json produced by an external backend. A missing counts file
// raises ExecutorError after the batch file has been written, so the run can
// be repeated once the external results are in place.
class FileExecutor : public Executor {
 public:
  explicit FileExecutor(std::string directory)
      : directory_(std::move(directory)) {}

  std::vector<CountsTable> run(std::span<const Circuit> circuits,
                               std::int64_t shots) override;

 private:
  std::string directory_;
  int batch_index_ = 0;
};

}  // namespace qem
