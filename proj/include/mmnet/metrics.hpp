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
#ifndef MMNET_METRICS_HPP_
#define MMNET_METRICS_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mmnet/errors.hpp"

namespace mmnet {

/// C x C counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  using Counts =
      Eigen::Matrix<int64_t, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ConfusionMatrix(int num_classes,
                           std::vector<std::string> class_names = {});

  int num_classes() const { return static_cast<int>(counts_.rows()); }
  int64_t total() const { return counts_.sum(); }
  int64_t at(int t, int p) const { return counts_(t, p); }
  void add(int t, int p, int64_t n = 1);

  const Counts& counts() const { return counts_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  /// One-vs-rest reduction for class k.
  struct Tally {
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  };
  Tally tally(int k) const;

 private:
  Counts counts_;
  std::vector<std::string> class_names_;
};

ConfusionMatrix confusion_from_labels(const std::vector<int>& truth,
                                      const std::vector<int>& predicted,
                                      int num_classes,
                                      std::vector<std::string> class_names = {});

/// precision TP/(TP+FP), recall TP/(TP+FN), specificity TN/(TN+FP) and
/// F_beta = (1+b^2) P R / (b^2 P + R); zero denominators yield 0.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f_beta = 0.0;
};

ClassMetrics per_class_metrics(const ConfusionMatrix& cm, int k,
                               double beta = 1.0);

/// Pools TP/FP/FN/TN over all classes, then applies the formulas once.
ClassMetrics micro_average(const ConfusionMatrix& cm, double beta = 1.0);

/// Unweighted mean of the per-class metrics over all classes.
ClassMetrics macro_average(const ConfusionMatrix& cm, double beta = 1.0);

/// trace / total.
double accuracy(const ConfusionMatrix& cm);

struct MetricReport {
  std::vector<ClassMetrics> per_class;
  ClassMetrics micro;
  ClassMetrics macro;
  double accuracy = 0.0;
  double beta = 1.0;
};

MetricReport metric_report(const ConfusionMatrix& cm, double beta = 1.0);

/// Columns: micro P/R/F/specificity, macro P/R/F/specificity, accuracy
/// (fraction and rounded percent).
void print_metric_table(const MetricReport& report, std::ostream& os);
std::string metric_report_json(const MetricReport& report);

}  // namespace mmnet

#endif  // MMNET_METRICS_HPP_
