/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MMNET_FISHDB_HPP_
#define MMNET_FISHDB_HPP_

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmnet/forward.hpp"
#include "mmnet/model.hpp"
#include "mmnet/tensor.hpp"
#include "mmnet/weights.hpp"

namespace mmnet {

/// Category column of the fish catalog; the source of the binary verdict.
enum class FishCategory { Commercial, Danger };

/// One catalog row. Blank family/genus cells in the source CSV inherit the
/// previous row's value, so stored records are always fully populated.
struct FishRecord {
  int id = 0;
  std::string order_name;
  std::string family;
  std::string genus;
  std::string species;  // non-empty, unique
  std::string occurrence;
  std::string foreign_name;
  std::string local_name;
  std::string description;  // display provenance only
  FishCategory category = FishCategory::Commercial;
};

enum class VerdictLabel { Consumable, Unconsumable };
enum class VerdictBasis { SpeciesMatch, GenusFallback };

struct ConsumabilityVerdict {
  VerdictLabel label = VerdictLabel::Consumable;
  VerdictBasis basis = VerdictBasis::SpeciesMatch;
  std::vector<int> matched_ids;
  double confidence = 0.0;  // classifier probability, [0,1]
};

/// A genus whose species split across both categories; surfaced, never
/// silently resolved.
struct GenusAmbiguity {
  std::string genus;
  std::vector<int> commercial_ids;
  std::vector<int> danger_ids;
};

using GenusLookup = std::variant<ConsumabilityVerdict, GenusAmbiguity>;

/// Immutable after ingestion; lookups are read-only and freely concurrent.
class FishDb {
 public:
  /// CSV with the exact header
  /// ID,Order,Family,Genus,Species,Occurrence,Foreign name,Local Name,
  /// Description,Category. Blank family/genus fill downward; duplicate
  /// species and unknown categories are rejected.
  static FishDb ingest_csv(const std::string& path);
  static FishDb from_records(std::vector<FishRecord> records);

  const std::vector<FishRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  /// Species-level lookup. nullopt is the species-miss signal that triggers
  /// the genus fallback.
  std::optional<ConsumabilityVerdict> lookup_species(
      const std::string& species) const;

  /// Genus-level fallback: a verdict when all species of the genus share a
  /// category, an ambiguity report otherwise. Unknown genus throws.
  GenusLookup lookup_genus(const std::string& genus) const;

  /// species lookup, then genus fallback (genus = first word of the
  /// species binomial). nullopt when neither resolves.
  std::optional<GenusLookup> resolve(const std::string& species) const;

 private:
  std::vector<FishRecord> records_;
  std::map<std::string, size_t> by_species_;
  std::map<std::string, std::vector<size_t>> by_genus_;

  void index();
};

std::string verdict_json(const std::string& species,
                         const ConsumabilityVerdict& verdict);

// ---------------------------------------------------------------------------
// Classifier + database pipeline
// ---------------------------------------------------------------------------

/// A trained model bound to its label names, ready for the two-stage
/// image -> species -> consumability pipeline.
struct ClassifierModel {
  ArchitectureSpec spec;
  WeightStore<float> store;
  std::vector<std::string> class_names;
};

/// Every class name must resolve in the database (species match or
/// unambiguous genus); violations are a configuration error here so queries
/// can never fail on a name.
void validate_model_db(const ClassifierModel& model, const FishDb& db);

struct PipelineResult {
  std::string species;  // stage-1 prediction
  ConsumabilityVerdict verdict;
};

/// Stage 1: argmax of forward() probabilities names the species. Stage 2:
/// species lookup with genus fallback. The verdict carries the stage-1
/// confidence.
PipelineResult classify_pipeline(const Tensor<float>& image,
                                 ClassifierModel& model, const FishDb& db);

// ---------------------------------------------------------------------------
// Dataset manifests
// ---------------------------------------------------------------------------

enum class SplitSide { Train, Test };

struct ManifestItem {
  std::string path;
  int label = 0;
  SplitSide split = SplitSide::Train;
};

/// Image paths with labels and a train/test assignment. Class names come
/// from the directory layout <root>/<species_id>/<image>.png|jpg.
struct DatasetManifest {
  std::vector<ManifestItem> items;
  std::vector<std::string> class_names;

  size_t count(SplitSide side) const;
  std::vector<int64_t> per_class_counts() const;

  static DatasetManifest scan(const std::string& root);

  /// Collapses species labels to genus labels (first token of the
  /// directory name, '_' treated as a space).
  DatasetManifest remap_to_genus() const;
};

/// Stratified split: train gets round(N * ratio) items overall, allocated
/// per class by largest remainder; the rest are test. Deterministic by
/// seed. Classes with fewer than 2 items are a stratification error.
DatasetManifest dataset_split(const DatasetManifest& manifest, double ratio,
                              uint64_t seed);

/// The arithmetic of dataset_split without materializing items.
std::pair<int64_t, int64_t> split_sizes(int64_t total, double ratio);

}  // namespace mmnet

#endif  // MMNET_FISHDB_HPP_
