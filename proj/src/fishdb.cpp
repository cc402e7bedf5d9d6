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
#include "mmnet/fishdb.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"

namespace mmnet {

namespace {

const char* kHeader =
    "ID,Order,Family,Genus,Species,Occurrence,Foreign name,Local Name,"
    "Description,Category";

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Minimal CSV line split with double-quote support.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

FishCategory parse_category(const std::string& s, int row_id) {
  if (s == "Commercial") return FishCategory::Commercial;
  if (s == "Danger") return FishCategory::Danger;
  throw FormatError("row " + std::to_string(row_id) +
                    ": unknown category '" + s + "' (Commercial|Danger)");
}

std::string first_token(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '_', ' ');
  auto sp = s.find(' ');
  return sp == std::string::npos ? s : s.substr(0, sp);
}

ConsumabilityVerdict verdict_for(FishCategory cat, VerdictBasis basis,
                                 std::vector<int> ids) {
  ConsumabilityVerdict v;
  v.label = cat == FishCategory::Commercial ? VerdictLabel::Consumable
                                            : VerdictLabel::Unconsumable;
  v.basis = basis;
  v.matched_ids = std::move(ids);
  return v;
}

}  // namespace

FishDb FishDb::ingest_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open fish database '" + path + "'");

  std::string line;
  if (!std::getline(is, line))
    throw FormatError("'" + path + "': empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    throw FormatError("'" + path + "': missing or malformed header, expected '" +
                      std::string(kHeader) + "'");

  std::vector<FishRecord> records;
  std::string prev_family, prev_genus;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 10)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected 10 "
                        "fields, got " + std::to_string(f.size()));
    FishRecord r;
    r.id = std::stoi(f[0]);
    r.order_name = f[1];
    r.family = f[2].empty() ? prev_family : f[2];
    r.genus = f[3].empty() ? prev_genus : f[3];
    r.species = f[4];
    r.occurrence = f[5];
    r.foreign_name = f[6];
    r.local_name = f[7];
    r.description = f[8];
    r.category = parse_category(f[9], r.id);
    if (r.species.empty())
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": empty species");
    prev_family = r.family;
    prev_genus = r.genus;
    records.push_back(std::move(r));
  }
  return from_records(std::move(records));
}

FishDb FishDb::from_records(std::vector<FishRecord> records) {
  FishDb db;
  db.records_ = std::move(records);
  db.index();
  return db;
}

void FishDb::index() {
  by_species_.clear();
  by_genus_.clear();
  for (size_t i = 0; i < records_.size(); ++i) {
    const FishRecord& r = records_[i];
    if (!by_species_.emplace(r.species, i).second)
      throw DuplicateNameError("duplicate species '" + r.species + "'");
    by_genus_[r.genus].push_back(i);
  }
}

std::optional<ConsumabilityVerdict> FishDb::lookup_species(
    const std::string& species) const {
  if (records_.empty()) throw ConfigError("fish database is empty");
  auto it = by_species_.find(species);
  if (it == by_species_.end()) return std::nullopt;
  const FishRecord& r = records_[it->second];
  return verdict_for(r.category, VerdictBasis::SpeciesMatch, {r.id});
}

GenusLookup FishDb::lookup_genus(const std::string& genus) const {
  if (records_.empty()) throw ConfigError("fish database is empty");
  auto it = by_genus_.find(genus);
  if (it == by_genus_.end())
    throw LookupError("genus '" + genus + "' not in database");

  std::vector<int> commercial, danger;
  for (size_t idx : it->second) {
    const FishRecord& r = records_[idx];
    (r.category == FishCategory::Commercial ? commercial : danger)
        .push_back(r.id);
  }
  if (commercial.empty() || danger.empty()) {
    FishCategory cat = commercial.empty() ? FishCategory::Danger
                                          : FishCategory::Commercial;
    std::vector<int> ids = commercial.empty() ? danger : commercial;
    return verdict_for(cat, VerdictBasis::GenusFallback, std::move(ids));
  }
  GenusAmbiguity amb;
  amb.genus = genus;
  amb.commercial_ids = std::move(commercial);
  amb.danger_ids = std::move(danger);
  return amb;
}

std::optional<GenusLookup> FishDb::resolve(const std::string& species) const {
  if (auto v = lookup_species(species)) return GenusLookup{*v};
  const std::string genus = first_token(species);
  if (by_genus_.find(genus) == by_genus_.end()) return std::nullopt;
  return lookup_genus(genus);
}

std::string verdict_json(const std::string& species,
                         const ConsumabilityVerdict& v) {
  nlohmann::json j;
  j["species"] = species;
  j["confidence"] = v.confidence;
  j["verdict"] =
      v.label == VerdictLabel::Consumable ? "Consumable" : "Unconsumable";
  j["basis"] = v.basis == VerdictBasis::SpeciesMatch ? "species-match"
                                                     : "genus-fallback";
  return j.dump();
}

void validate_model_db(const ClassifierModel& model, const FishDb& db) {
  if (model.class_names.size() != static_cast<size_t>(model.spec.num_classes))
    throw ConfigError("model declares " +
                      std::to_string(model.spec.num_classes) +
                      " classes but carries " +
                      std::to_string(model.class_names.size()) + " names");
  for (const std::string& raw : model.class_names) {
    std::string name = raw;
    std::replace(name.begin(), name.end(), '_', ' ');
    auto resolved = db.resolve(name);
    if (!resolved)
      throw ConfigError("model class '" + raw +
                        "' matches no species or genus in the database");
    if (std::holds_alternative<GenusAmbiguity>(*resolved))
      throw ConfigError("model class '" + raw +
                        "' resolves only to genus '" + first_token(name) +
                        "', whose categories are mixed");
  }
}

PipelineResult classify_pipeline(const Tensor<float>& image,
                                 ClassifierModel& model, const FishDb& db) {
  Tensor<float> batch(Shape{1, image.dim(0), image.dim(1), image.dim(2)});
  std::copy(image.data(), image.data() + image.size(), batch.data());
  Tensor<float> probs = forward(model.spec, model.store, batch, RunMode::Infer);

  Index arg = 0;
  for (Index c = 1; c < probs.dim(1); ++c)
    if (probs(0, c) > probs(0, arg)) arg = c;

  PipelineResult result;
  result.species = model.class_names[static_cast<size_t>(arg)];
  std::string lookup_name = result.species;
  std::replace(lookup_name.begin(), lookup_name.end(), '_', ' ');

  auto resolved = db.resolve(lookup_name);
  if (!resolved || std::holds_alternative<GenusAmbiguity>(*resolved))
    throw LookupError("prediction '" + result.species +
                      "' cannot be resolved; validate_model_db should have "
                      "caught this at load time");
  result.verdict = std::get<ConsumabilityVerdict>(*resolved);
  result.verdict.confidence = static_cast<double>(probs(0, arg));
  return result;
}

size_t DatasetManifest::count(SplitSide side) const {
  size_t n = 0;
  for (const auto& item : items)
    if (item.split == side) ++n;
  return n;
}

std::vector<int64_t> DatasetManifest::per_class_counts() const {
  std::vector<int64_t> counts(class_names.size(), 0);
  for (const auto& item : items)
    ++counts[static_cast<size_t>(item.label)];
  return counts;
}

DatasetManifest DatasetManifest::scan(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw IoError("dataset root '" + root + "' is not a directory");

  DatasetManifest m;
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path().filename().string());
  std::sort(dirs.begin(), dirs.end());

  for (const std::string& dir : dirs) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
        files.push_back(entry.path().string());
    }
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    const int label = static_cast<int>(m.class_names.size());
    m.class_names.push_back(dir);
    for (auto& f : files) m.items.push_back({std::move(f), label});
  }
  if (m.items.empty())
    throw IoError("dataset root '" + root + "' holds no images");
  return m;
}

DatasetManifest DatasetManifest::remap_to_genus() const {
  DatasetManifest out;
  std::map<std::string, int> genus_label;
  std::vector<int> remap(class_names.size());
  for (size_t c = 0; c < class_names.size(); ++c) {
    const std::string genus = first_token(class_names[c]);
    auto it = genus_label.find(genus);
    if (it == genus_label.end()) {
      it = genus_label.emplace(genus, static_cast<int>(out.class_names.size()))
               .first;
      out.class_names.push_back(genus);
    }
    remap[c] = it->second;
  }
  out.items = items;
  for (auto& item : out.items)
    item.label = remap[static_cast<size_t>(item.label)];
  return out;
}

std::pair<int64_t, int64_t> split_sizes(int64_t total, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ConfigError("split ratio must lie in (0,1)");
  int64_t train = std::llround(static_cast<double>(total) * ratio);
  return {train, total - train};
}

DatasetManifest dataset_split(const DatasetManifest& manifest, double ratio,
                              uint64_t seed) {
  const auto [target_train, target_test] =
      split_sizes(static_cast<int64_t>(manifest.items.size()), ratio);
  (void)target_test;

  const size_t classes = manifest.class_names.size();
  std::vector<std::vector<size_t>> per_class(classes);
  for (size_t i = 0; i < manifest.items.size(); ++i)
    per_class[static_cast<size_t>(manifest.items[i].label)].push_back(i);

  std::vector<std::string> singletons;
  for (size_t c = 0; c < classes; ++c)
    if (per_class[c].size() < 2) singletons.push_back(manifest.class_names[c]);
  if (!singletons.empty()) {
    std::string msg = "stratification needs >= 2 images per class; offenders:";
    for (const auto& s : singletons) msg += " " + s;
    throw ConfigError(msg);
  }

  // Largest-remainder allocation of the global train budget across classes.
  std::vector<int64_t> take(classes);
  std::vector<std::pair<double, size_t>> remainders;
  int64_t assigned = 0;
  for (size_t c = 0; c < classes; ++c) {
    double exact = static_cast<double>(per_class[c].size()) * ratio;
    take[c] = static_cast<int64_t>(std::floor(exact));
    assigned += take[c];
    remainders.push_back({exact - std::floor(exact), c});
  }
  std::sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (size_t i = 0; assigned < target_train && i < remainders.size(); ++i) {
    size_t c = remainders[i].second;
    if (take[c] < static_cast<int64_t>(per_class[c].size())) {
      ++take[c];
      ++assigned;
    }
  }
  // Under-allocation can only remain if every class is saturated.
  for (size_t c = 0; assigned < target_train && c < classes; ++c) {
    while (assigned < target_train &&
           take[c] < static_cast<int64_t>(per_class[c].size())) {
      ++take[c];
      ++assigned;
    }
  }

  DatasetManifest out = manifest;
  Rng rng(seed);
  for (size_t c = 0; c < classes; ++c) {
    auto& idx = per_class[c];
    Rng class_rng = rng.split(c);
    for (size_t i = idx.size() - 1; i > 0; --i) {
      size_t j = static_cast<size_t>(
          class_rng.uniform(0.0, static_cast<double>(i + 1)));
      std::swap(idx[i], idx[j]);
    }
    for (size_t i = 0; i < idx.size(); ++i)
      out.items[idx[i]].split = i < static_cast<size_t>(take[c])
                                    ? SplitSide::Train
                                    : SplitSide::Test;
  }
  return out;
}

}  // namespace mmnet
