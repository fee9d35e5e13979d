#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dal/anchors.hpp"
#include "dal/linalg.hpp"
#include "dal/model.hpp"
#include "dal/rng.hpp"

namespace dal {

// One frame's feature vector plus its tracklet/camera membership. The
// identity label is carried for evaluation only; the training path never
// reads it.
struct FrameRecord {
  std::int64_t frame_id = 0;
  std::size_t tracklet_index = 0;
  std::size_t camera_id = 0;
  Vec feature;
  std::optional<std::int64_t> identity_id;
};

struct Dataset {
  std::vector<FrameRecord> frames;
  std::size_t cameras = 0;
  std::vector<std::size_t> tracklets_per_camera;
  std::size_t dim = 0;
  bool has_labels = false;
  // Row indices into `frames`, grouped as [camera][tracklet].
  std::vector<std::vector<std::vector<std::size_t>>> frames_by_tracklet;
  // identity_of[camera][tracklet]; only populated when has_labels.
  std::vector<std::vector<std::int64_t>> identity_of;

  std::size_t total_tracklets() const;
  // Cross-camera training needs at least two cameras (SingleCamera).
  void validate_for_training() const;
};

// Validates structure (dense tracklet indices per camera, uniform dimensions,
// finite features, uniform labels) and builds the lookup tables.
Dataset build_dataset(std::vector<FrameRecord> frames);

// --- binary feature matrix ---------------------------------------------------
// Layout: magic "DALF", u32 version (=1), u64 row count, u32 dimension, then
// row-major f32 values. All integers and floats little-endian.
void save_features(const std::string& path, const std::vector<Vec>& rows);
std::vector<Vec> load_feature_rows(const std::string& path);

// --- manifest ----------------------------------------------------------------
// UTF-8 CSV, header `frame_id,tracklet_index,camera_id[,identity_id]`, one
// row per feature row, in row order.
struct ManifestRow {
  std::int64_t frame_id = 0;
  std::size_t tracklet_index = 0;
  std::size_t camera_id = 0;
  std::optional<std::int64_t> identity_id;
};
void save_manifest(const std::string& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> load_manifest(const std::string& path);

// Load and cross-validate the feature file and manifest into a Dataset.
Dataset load_features(const std::string& feature_path, const std::string& manifest_path);
void save_dataset(const std::string& feature_path, const std::string& manifest_path,
                  const Dataset& ds);

// --- synthetic benchmark -----------------------------------------------------
// Per identity a unit prototype; per (identity, camera) one tracklet whose
// frames are camera_transform(prototype) + per-coordinate Gaussian noise.
// The camera transform is I + distortion * G / sqrt(dim) with standard-normal
// G (exactly I when distortion is 0).
struct SyntheticConfig {
  std::size_t identities = 50;
  std::size_t cameras = 2;
  std::size_t frames_min = 3;
  std::size_t frames_max = 5;
  std::size_t dim = 32;
  double distortion = 0.6;
  double noise = 0.1;           // per-coordinate standard deviation
  double min_separation = 0.5;  // pairwise prototype angle, radians
  std::uint64_t seed = 1;

  void validate() const;  // ConfigInvalid
};

Dataset generate_synthetic(const SyntheticConfig& config);

// --- batch sampling ----------------------------------------------------------
// Uniform draw over all frames: without replacement within one batch, with
// replacement only when the batch exceeds the dataset.
std::vector<std::size_t> sample_batch(Rng& rng, const Dataset& ds, std::size_t batch);

// Optional balanced mode: walk a shuffled list of every (camera, tracklet)
// pair in batch-size chunks, drawing one random frame from each, reshuffling
// when a round completes. Guarantees every anchor an update each round.
class BalancedSampler {
 public:
  BalancedSampler() = default;
  explicit BalancedSampler(const Dataset& ds);

  std::vector<std::size_t> next(Rng& rng, const Dataset& ds, std::size_t batch);

  std::string serialize() const;
  static BalancedSampler deserialize(const std::string& text);
  bool operator==(const BalancedSampler&) const = default;

 private:
  std::vector<std::pair<std::size_t, std::size_t>> order_;
  std::size_t cursor_ = 0;
};

// --- checkpoint --------------------------------------------------------------
// Layout: magic "DALC", u32 version (=1), u64 iteration, then length-prefixed
// sections (4-byte tag + u64 byte length) for the head, optimizer, anchor
// bank, random-source state, and sampler state.
struct Checkpoint {
  std::uint64_t iteration = 0;
  EmbeddingHead head;
  OptimizerState optimizer;
  AnchorBank bank;
  std::string rng_state;
  std::string sampler_state;  // empty when sampling uniformly

  bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dal
