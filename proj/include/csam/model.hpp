#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "csam/basis.hpp"
#include "csam/optimizer.hpp"
#include "csam/types.hpp"

namespace csam {

// Serialized model header mismatch: the file declares a format this build
// does not read.
class ModelVersionError : public Error {
 public:
  ModelVersionError(long long found, long long supported)
      : Error("model file declares format version " + std::to_string(found) +
              "; this build supports version " + std::to_string(supported)),
        found_(found),
        supported_(supported) {}
  long long found() const { return found_; }
  long long supported() const { return supported_; }

 private:
  long long found_;
  long long supported_;
};

// Structurally invalid model document; byte_offset points at the failure.
class ModelParseError : public Error {
 public:
  ModelParseError(const std::string& msg, std::size_t byte_offset)
      : Error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Model document ends before the closing marker; byte_offset is the file
// size at which input ran out.
class ModelTruncatedError : public Error {
 public:
  explicit ModelTruncatedError(std::size_t byte_offset)
      : Error("model file is truncated (byte offset " +
              std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

struct ModelMetadata {
  Index train_rows = 0;
  std::uint64_t seed = 0;
  bool converged = false;
};

// An immutable trained additive classifier: basis configuration, frozen
// normalization stats, flattened coefficients (feature-major blocks), the
// solver configuration that produced them, and training metadata.
class TrainedModel {
 public:
  TrainedModel(BasisConfig basis, NormalizationStats stats, Vector coef,
               SolverConfig solver, ModelMetadata metadata);

  // Convenience trainer; optionally exposes the solver trace.
  static TrainedModel train(const FeatureMatrix& data, const BasisConfig& basis,
                            const SolverConfig& config,
                            SolverTrace* trace_out = nullptr);

  Index num_features() const { return stats_.num_features(); }
  Index basis_dimension() const { return basis_.dimension; }

  // Additive score: sum over features of the basis expansion of the
  // normalized coordinate dotted with that feature's coefficient block.
  double predict_score(const Eigen::Ref<const Vector>& x) const;

  // sign(score) with the tie sign(0) = +1.
  int predict_label(const Eigen::Ref<const Vector>& x) const;

  // Batch versions; one row per sample.
  Vector scores(const Eigen::Ref<const Matrix>& X) const;
  std::vector<int> labels(const Eigen::Ref<const Matrix>& X) const;

  // Norm of each feature's coefficient block under the trained penalty norm.
  Vector feature_group_norms() const;

  // Features whose group norm exceeds tau * (largest group norm), ordered by
  // descending norm with ties broken by ascending index. Empty when all
  // norms are zero.
  std::vector<Index> select_features(double tau = 1e-3) const;

  // The per-feature component function evaluated on a uniform grid of
  // grid_size points spanning the observed (raw) range of feature j.
  std::vector<std::pair<double, double>> component_curve(
      Index j, Index grid_size) const;

  // Versioned line-oriented text document; decimal fields round-trip
  // bit-exactly through load().
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

  const BasisConfig& basis() const { return basis_; }
  const NormalizationStats& stats() const { return stats_; }
  const Vector& coefficients() const { return coef_; }
  const SolverConfig& solver() const { return solver_; }
  const ModelMetadata& metadata() const { return metadata_; }

 private:
  BasisConfig basis_;
  NormalizationStats stats_;
  Vector coef_;
  SolverConfig solver_;
  ModelMetadata metadata_;
};

}  // namespace csam
