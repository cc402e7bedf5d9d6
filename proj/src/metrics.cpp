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
#include "mmnet/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace mmnet {

namespace {

double ratio(int64_t num, int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f_beta_of(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * precision + recall;
  return den == 0.0 ? 0.0 : (1.0 + b2) * precision * recall / den;
}

ClassMetrics from_tally(const ConfusionMatrix::Tally& t, double beta) {
  ClassMetrics m;
  m.precision = ratio(t.tp, t.tp + t.fp);
  m.recall = ratio(t.tp, t.tp + t.fn);
  m.specificity = ratio(t.tn, t.tn + t.fp);
  m.f_beta = f_beta_of(m.precision, m.recall, beta);
  return m;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes,
                                 std::vector<std::string> class_names)
    : counts_(Counts::Zero(num_classes, num_classes)),
      class_names_(std::move(class_names)) {
  if (num_classes < 1) throw ConfigError("confusion matrix needs >= 1 class");
  if (!class_names_.empty() &&
      class_names_.size() != static_cast<size_t>(num_classes))
    throw ConfigError("class name count does not match class count");
}

void ConfusionMatrix::add(int t, int p, int64_t n) {
  if (t < 0 || t >= num_classes() || p < 0 || p >= num_classes())
    throw LookupError("label (" + std::to_string(t) + "," + std::to_string(p) +
                      ") out of range [0," + std::to_string(num_classes()) +
                      ")");
  counts_(t, p) += n;
}

ConfusionMatrix::Tally ConfusionMatrix::tally(int k) const {
  if (k < 0 || k >= num_classes())
    throw LookupError("class " + std::to_string(k) + " out of range");
  Tally t;
  t.tp = counts_(k, k);
  t.fp = counts_.col(k).sum() - t.tp;
  t.fn = counts_.row(k).sum() - t.tp;
  t.tn = counts_.sum() - t.tp - t.fp - t.fn;
  return t;
}

ConfusionMatrix confusion_from_labels(const std::vector<int>& truth,
                                      const std::vector<int>& predicted,
                                      int num_classes,
                                      std::vector<std::string> class_names) {
  if (truth.size() != predicted.size())
    throw ConfigError("label vectors differ in length");
  ConfusionMatrix cm(num_classes, std::move(class_names));
  for (size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

ClassMetrics per_class_metrics(const ConfusionMatrix& cm, int k, double beta) {
  return from_tally(cm.tally(k), beta);
}

ClassMetrics micro_average(const ConfusionMatrix& cm, double beta) {
  ConfusionMatrix::Tally pool;
  for (int k = 0; k < cm.num_classes(); ++k) {
    auto t = cm.tally(k);
    pool.tp += t.tp;
    pool.fp += t.fp;
    pool.fn += t.fn;
    pool.tn += t.tn;
  }
  return from_tally(pool, beta);
}

ClassMetrics macro_average(const ConfusionMatrix& cm, double beta) {
  ClassMetrics sum;
  const int c = cm.num_classes();
  for (int k = 0; k < c; ++k) {
    ClassMetrics m = per_class_metrics(cm, k, beta);
    sum.precision += m.precision;
    sum.recall += m.recall;
    sum.specificity += m.specificity;
    sum.f_beta += m.f_beta;
  }
  sum.precision /= c;
  sum.recall /= c;
  sum.specificity /= c;
  sum.f_beta /= c;
  return sum;
}

double accuracy(const ConfusionMatrix& cm) {
  const int64_t total = cm.total();
  if (total == 0) throw ConfigError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.counts().trace()) /
         static_cast<double>(total);
}

MetricReport metric_report(const ConfusionMatrix& cm, double beta) {
  MetricReport r;
  r.beta = beta;
  for (int k = 0; k < cm.num_classes(); ++k)
    r.per_class.push_back(per_class_metrics(cm, k, beta));
  r.micro = micro_average(cm, beta);
  r.macro = macro_average(cm, beta);
  r.accuracy = accuracy(cm);
  return r;
}

void print_metric_table(const MetricReport& r, std::ostream& os) {
  auto row = [&os](const char* name, const ClassMetrics& m) {
    os << std::left << std::setw(7) << name << std::right << std::fixed
       << std::setprecision(3) << std::setw(10) << m.precision << std::setw(10)
       << m.recall << std::setw(10) << m.f_beta << std::setw(13)
       << m.specificity << "\n";
  };
  os << std::left << std::setw(7) << "" << std::right << std::setw(10)
     << "precision" << std::setw(10) << "recall" << std::setw(10) << "f-score"
     << std::setw(13) << "specificity" << "\n";
  row("micro", r.micro);
  row("macro", r.macro);
  os << "accuracy " << std::fixed << std::setprecision(4) << r.accuracy
     << "  (" << std::lround(r.accuracy * 100.0) << "%)\n";
}

std::string metric_report_json(const MetricReport& r) {
  nlohmann::json j;
  j["schema"] = 1;
  auto pack = [](const ClassMetrics& m) {
    return nlohmann::json{{"precision", m.precision},
                          {"recall", m.recall},
                          {"f_beta", m.f_beta},
                          {"specificity", m.specificity}};
  };
  j["beta"] = r.beta;
  j["micro"] = pack(r.micro);
  j["macro"] = pack(r.macro);
  j["accuracy"] = r.accuracy;
  j["accuracy_percent"] = std::lround(r.accuracy * 100.0);
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : r.per_class) per.push_back(pack(m));
  j["per_class"] = per;
  return j.dump();
}

}  // namespace mmnet
