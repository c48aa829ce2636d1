#include "trajprune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "trajprune/error.hpp"

namespace trajprune {

namespace {

template <typename T>
std::vector<double> softmax_impl(std::span<const T> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  double hi = -std::numeric_limits<double>::infinity();
  for (T v : z) hi = std::max(hi, static_cast<double>(v));
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(static_cast<double>(z[i]) - hi);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

double SoftLabel::max_prob() const {
  return probs.empty() ? 0.0 : *std::max_element(probs.begin(), probs.end());
}

ClassId SoftLabel::argmax() const {
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return static_cast<ClassId>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::Entropy: return "entropy";
    case Metric::Aum: return "aum";
    case Metric::Forgetting: return "forgetting";
    case Metric::El2n: return "el2n";
    case Metric::MovingAvgLoss: return "mal";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "entropy") return Metric::Entropy;
  if (name == "aum") return Metric::Aum;
  if (name == "forgetting") return Metric::Forgetting;
  if (name == "el2n") return Metric::El2n;
  if (name == "mal" || name == "moving_avg_loss") return Metric::MovingAvgLoss;
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(name) + "'");
}

std::string_view score_unit(Metric metric) noexcept {
  switch (metric) {
    case Metric::Entropy: return "bits";
    case Metric::Aum: return "logit";
    case Metric::Forgetting: return "count";
    case Metric::El2n: return "l2";
    case Metric::MovingAvgLoss: return "nats";
  }
  return "";
}

std::vector<double> softmax(std::span<const double> logits) { return softmax_impl(logits); }
std::vector<double> softmax(std::span<const float> logits) { return softmax_impl(logits); }

double log_sum_exp(std::span<const float> logits) {
  double hi = -std::numeric_limits<double>::infinity();
  for (float v : logits) hi = std::max(hi, static_cast<double>(v));
  double sum = 0.0;
  for (float v : logits) sum += std::exp(static_cast<double>(v) - hi);
  return hi + std::log(sum);
}

ClassId argmax(std::span<const float> logits) {
  return static_cast<ClassId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

SoftLabel soft_label(std::span<const double> mean_logits) {
  for (double v : mean_logits) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "soft_label input is not finite");
  }
  return SoftLabel{softmax(mean_logits)};
}

double entropy_score(const SoftLabel& label) {
  double h = 0.0;
  for (double p : label.probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  const double upper = label.probs.empty() ? 0.0 : std::log2(static_cast<double>(label.probs.size()));
  return std::clamp(h, 0.0, upper);
}

std::vector<double> mean_logits(const TrajectoryLog& log, std::size_t sample, const EpochSelector& sel) {
  const auto epochs = sel.resolve(log.n_epochs);
  std::vector<double> acc(log.n_classes, 0.0);
  for (Epoch t : epochs) {
    const auto z = log.row(t, sample);
    for (std::size_t i = 0; i < z.size(); ++i) acc[i] += static_cast<double>(z[i]);
  }
  const double count = static_cast<double>(epochs.size());
  for (double& v : acc) v /= count;
  return acc;
}

double aum_score(const TrajectoryLog& log, std::size_t sample, const EpochSelector& sel) {
  if (log.n_classes < 2) throw Error(ErrorCode::MaxOverEmptySet, "AUM needs at least two classes");
  const auto epochs = sel.resolve(log.n_epochs);
  const ClassId y = log.labels[sample];
  double acc = 0.0;
  for (Epoch t : epochs) {
    const auto z = log.row(t, sample);
    double other = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (i != y) other = std::max(other, static_cast<double>(z[i]));
    }
    acc += static_cast<double>(z[y]) - other;
  }
  return acc / static_cast<double>(epochs.size());
}

double forgetting_score(const TrajectoryLog& log, std::size_t sample, const EpochSelector& sel) {
  const auto epochs = sel.resolve(log.n_epochs);
  const ClassId y = log.labels[sample];
  bool ever_correct = false;
  bool prev = false;
  std::size_t events = 0;
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const bool correct = argmax(log.row(epochs[k], sample)) == y;
    if (k > 0 && prev && !correct) ++events;
    ever_correct = ever_correct || correct;
    prev = correct;
  }
  return ever_correct ? static_cast<double>(events) : static_cast<double>(epochs.size());
}

double forgetting_score(const TrajectoryLog& log, std::size_t sample) {
  return forgetting_score(log, sample, EpochSelector::upto(log.n_epochs));
}

double el2n_score(const TrajectoryLog& log, std::size_t sample, Epoch at_epoch) {
  const auto z = log.row(at_epoch, sample);
  const auto p = softmax(z);
  const ClassId y = log.labels[sample];
  // 1 - p_y is summed from the other entries so it keeps precision as p_y → 1.
  double sq = 0.0;
  double rest = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == y) continue;
    sq += p[i] * p[i];
    rest += p[i];
  }
  return std::sqrt(sq + rest * rest);
}

double moving_avg_loss(const TrajectoryLog& log, std::size_t sample, const EpochSelector& sel) {
  const auto epochs = sel.resolve(log.n_epochs);
  const ClassId y = log.labels[sample];
  double acc = 0.0;
  for (Epoch t : epochs) {
    const auto z = log.row(t, sample);
    acc += log_sum_exp(z) - static_cast<double>(z[y]);
  }
  return acc / static_cast<double>(epochs.size());
}

ScoreTable score_dataset(const TrajectoryLog& log, Metric metric, const EpochSelector& sel) {
  if (metric == Metric::El2n && sel.mode() != EpochSelector::Mode::Single) {
    throw Error(ErrorCode::MetricSelectorMismatch, "el2n is computed at a single epoch, got " + sel.to_string());
  }
  (void)sel.resolve(log.n_epochs);

  ScoreTable table;
  table.metric = metric;
  table.selector = sel;
  table.n_classes = log.n_classes;
  table.sample_ids = log.sample_ids;
  table.labels = log.labels;
  table.scores.resize(log.n_samples());
  if (metric == Metric::Entropy) table.soft_labels.emplace(log.n_samples());

  for (std::size_t i = 0; i < log.n_samples(); ++i) {
    switch (metric) {
      case Metric::Entropy: {
        SoftLabel sl = soft_label(mean_logits(log, i, sel));
        table.scores[i] = entropy_score(sl);
        (*table.soft_labels)[i] = std::move(sl);
        break;
      }
      case Metric::Aum: table.scores[i] = aum_score(log, i, sel); break;
      case Metric::Forgetting: table.scores[i] = forgetting_score(log, i, sel); break;
      case Metric::El2n: table.scores[i] = el2n_score(log, i, sel.parameter()); break;
      case Metric::MovingAvgLoss: table.scores[i] = moving_avg_loss(log, i, sel); break;
    }
  }
  return table;
}

ScoreTable ensemble_average(std::span<const ScoreTable> tables) {
  if (tables.empty()) throw Error(ErrorCode::EmptyTable, "no tables to average");
  const ScoreTable& first = tables.front();
  if (tables.size() == 1) return first;

  std::unordered_map<SampleId, std::size_t> index;
  index.reserve(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) index.emplace(first.sample_ids[i], i);

  ScoreTable out = first;
  out.soft_labels.reset();
  for (std::size_t k = 1; k < tables.size(); ++k) {
    const ScoreTable& t = tables[k];
    if (t.metric != first.metric || !(t.selector == first.selector)) {
      throw Error(ErrorCode::MetricMismatch, "table " + std::to_string(k) + " is " + std::string(to_string(t.metric)) +
                                                 "/" + t.selector.to_string() + ", expected " +
                                                 std::string(to_string(first.metric)) + "/" + first.selector.to_string());
    }
    if (t.size() != first.size()) {
      throw Error(ErrorCode::SampleSetMismatch, "table " + std::to_string(k) + " has " + std::to_string(t.size()) +
                                                    " samples, expected " + std::to_string(first.size()));
    }
    std::vector<bool> hit(first.size(), false);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto it = index.find(t.sample_ids[i]);
      if (it == index.end() || hit[it->second]) {
        throw Error(ErrorCode::SampleSetMismatch, "sample " + std::to_string(t.sample_ids[i]) + " of table " +
                                                      std::to_string(k) + " does not match the first table");
      }
      hit[it->second] = true;
      out.scores[it->second] += t.scores[i];
    }
  }
  const double count = static_cast<double>(tables.size());
  for (double& s : out.scores) s /= count;
  out.source_log.clear();
  for (std::size_t k = 0; k < tables.size(); ++k) {
    if (k) out.source_log += ',';
    out.source_log += tables[k].source_log;
  }
  return out;
}

}  // namespace trajprune
