#ifndef PERFMOD_REPOSITORY_HPP_
#define PERFMOD_REPOSITORY_HPP_

#include <optional>
#include <string>
#include <vector>

#include "perfmod/piecewise.hpp"

namespace perfmod {

struct ModelKey {
  std::string kernel;
  FlagBinding binding;
  std::string machine;
  int threads{1};

  std::string to_string() const;  // "machine/kernel/flags.tN"
  bool operator==(const ModelKey&) const = default;
};

struct ModelMetadata {
  std::string created;   // ISO-8601, may be empty for reproducible builds
  std::string strategy;  // "expansion" | "refinement" | "external"
  long long sample_count{0};
  double max_rel_err{0};
  std::string version{"perfmod-1"};
};

struct ModelRecord {
  ModelKey key;
  ModelMetadata metadata;
  PiecewiseModel model;
};

// JSON serialization of a record, coefficients as 17-significant-digit
// decimal strings; `checksum` covers the canonicalized body.
std::string serialize_record(const ModelRecord& record);
ModelRecord deserialize_record(const std::string& json_text, const std::string& origin);

// File path for a key under repo_root:
//   <root>/<machine>/<kernel>/<flag-string>.t<threads>.model
// where flag-string joins sorted name=value pairs with '_'.
std::string record_path(const std::string& repo_root, const ModelKey& key);

// Atomic (write-temp-then-rename). Refuses to overwrite unless force.
std::string store(const ModelRecord& record, const std::string& repo_root,
                  bool force = false);

// Exact-key match; missing keys raise MissingModelError naming the nearest
// stored keys for the same kernel. Checksum failures raise IntegrityError.
ModelRecord lookup(const ModelKey& key, const std::string& repo_root);

struct ModelListing {
  ModelKey key;
  ModelMetadata metadata;
  std::string path;
};

// Scans the repository; filters are substring matches (empty = no filter).
std::vector<ModelListing> list_models(const std::string& repo_root,
                                      const std::string& kernel_filter = "",
                                      const std::string& machine_filter = "");

}  // namespace perfmod

#endif  // PERFMOD_REPOSITORY_HPP_
