#include "qem/executor.hpp"

#include <cstdio>
#include <filesystem>

#include "qem/errors.hpp"
#include "qem/serialize.hpp"

namespace qem {

std::vector<CountsTable> SimExecutor::run(std::span<const Circuit> circuits,
                                          std::int64_t shots) {
  auto results = execute(circuits, shots, noise_, seed_, counter_, options_);
  counter_ += circuits.size();
  return results;
}

std::vector<CountsTable> FileExecutor::run(std::span<const Circuit> circuits,
                                           std::int64_t shots) {
  namespace fs = std::filesystem;
  fs::create_directories(directory_);
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), "%03d", batch_index_);
  const std::string batch_path =
      (fs::path(directory_) / ("batch_" + std::string(suffix) + ".json")).string();
  const std::string counts_path =
      (fs::path(directory_) / ("counts_" + std::string(suffix) + ".json")).string();
  ++batch_index_;

  write_json_file(batch_path, batch_to_json(circuits, shots));
  if (!fs::exists(counts_path))
    throw ExecutorError("no counts at '" + counts_path +
                        "'; batch written to '" + batch_path +
                        "', produce counts externally and rerun");
  auto counts = counts_from_json(read_json_file(counts_path));
  if (counts.size() != circuits.size())
    throw ExecutorError("counts file '" + counts_path + "' has " +
                        std::to_string(counts.size()) + " entries, expected " +
                        std::to_string(circuits.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t total = 0;
    for (const auto& [bits, c] : counts[i]) {
      if (bits.size() != circuits[i].n_qubits)
        throw ExecutorError("bitstring width mismatch in '" + counts_path + "'");
      total += c;
    }
    if (total != shots)
      throw ExecutorError("counts for circuit " + std::to_string(i) +
                          " sum to " + std::to_string(total) + ", expected " +
                          std::to_string(shots));
  }
  return counts;
}

}  // namespace qem
