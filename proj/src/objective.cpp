#include "promptmatcher/objective.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "promptmatcher/errors.hpp"
#include "promptmatcher/rng.hpp"

namespace pm {

namespace {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double hbin(double p) { return -(xlogx(p) + xlogx(1.0 - p)); }

void check_confidence(double c, const char* what) {
  if (!(c >= 0.5) || c > 1.0) {
    std::ostringstream os;
    os << what << " must lie in [0.5, 1], got " << c;
    throw domain_error("MalformedInput", os.str());
  }
}

}  // namespace

double PlanningAccuracy::for_id(const std::string& corr_id) const {
  for (const auto& [id, v] : overrides) {
    if (id == corr_id) return v;
  }
  return global;
}

void PlanningAccuracy::validate() const {
  auto check = [](double v, const std::string& what) {
    if (!(v > 0.5) || v > 1.0) {
      std::ostringstream os;
      os << what << " must lie in (0.5, 1], got " << v;
      throw domain_error("MalformedInput", os.str());
    }
  };
  check(global, "planning accuracy");
  std::set<std::string> seen;
  for (const auto& [id, v] : overrides) {
    if (id.empty()) {
      throw domain_error("MalformedInput", "planning accuracy override has an empty correspondence id");
    }
    if (!seen.insert(id).second) {
      throw domain_error("MalformedInput", "duplicate planning accuracy override for \"" + id + "\"");
    }
    check(v, "planning accuracy override for \"" + id + "\"");
  }
}

double entropy(std::span<const double> probs) {
  double sum = 0.0;
  double h = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "probability " << p << " lies outside [0, 1]";
      throw domain_error("MalformedDistribution", os.str());
    }
    sum += p;
    h -= xlogx(p);
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "probabilities sum to " << sum << ", expected 1";
    throw domain_error("MalformedDistribution", os.str());
  }
  return std::max(0.0, h);
}

double answer_likelihood(const ViewSet& vs, size_t view, const AnswerFamily& fam) {
  if (fam.verdicts.size() != fam.corr_ids.size() || fam.confidences.size() != fam.corr_ids.size()) {
    throw domain_error("MalformedInput", "answer family fields must have equal lengths");
  }
  if (view >= vs.view_count()) {
    throw domain_error("MalformedInput", "view index out of range");
  }
  double like = 1.0;
  for (size_t i = 0; i < fam.corr_ids.size(); ++i) {
    check_confidence(fam.confidences[i], "answer confidence");
    size_t col = vs.index_of(fam.corr_ids[i]);
    bool agree = (fam.verdicts[i] != 0) == (vs.rows[view][col] != 0);
    like *= agree ? fam.confidences[i] : 1.0 - fam.confidences[i];
  }
  return like;
}

double family_probability(const ViewSet& vs, const AnswerFamily& fam) {
  if (fam.verdicts.size() != fam.corr_ids.size() || fam.confidences.size() != fam.corr_ids.size()) {
    throw domain_error("MalformedInput", "answer family fields must have equal lengths");
  }
  std::vector<size_t> cols(fam.corr_ids.size());
  for (size_t i = 0; i < fam.corr_ids.size(); ++i) {
    check_confidence(fam.confidences[i], "answer confidence");
    cols[i] = vs.index_of(fam.corr_ids[i]);
  }
  double total = 0.0;
  for (size_t v = 0; v < vs.view_count(); ++v) {
    if (vs.probabilities[v] == 0.0) continue;
    double like = 1.0;
    for (size_t i = 0; i < cols.size(); ++i) {
      bool agree = (fam.verdicts[i] != 0) == (vs.rows[v][cols[i]] != 0);
      like *= agree ? fam.confidences[i] : 1.0 - fam.confidences[i];
    }
    total += vs.probabilities[v] * like;
  }
  return total;
}

ReductionEvaluator::ReductionEvaluator(const ViewSet& vs, const PlanningAccuracy& acc,
                                       const EvalOptions& opt)
    : vs_(vs), opt_(opt) {
  acc.validate();
  if (opt_.exact_cap < 0) {
    throw domain_error("BadConfig", "exact_cap must be non-negative");
  }
  if (opt_.mc_samples < 1) {
    throw domain_error("BadConfig", "mc_samples must be at least 1");
  }
  h_prior_ = entropy(vs_.probabilities);
  uniform_ = acc.uniform();

  for (const auto& [id, v] : acc.overrides) {
    bool known = false;
    for (const std::string& cid : vs_.correspondence_ids) {
      if (cid == id) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw domain_error("UnknownCorrespondence",
                         "planning accuracy override names unknown correspondence \"" + id + "\"");
    }
  }

  const size_t n = vs_.corr_count();
  const size_t V = vs_.view_count();
  acc_by_item_.resize(n);
  hconf_by_item_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    acc_by_item_[i] = acc.for_id(vs_.correspondence_ids[i]);
    hconf_by_item_[i] = hbin(acc_by_item_[i]);
  }

  uint32_t max_m = 1;
  if (uniform_) {
    // Group correspondences whose truth column is identical across views;
    // answers inside such a class are exchangeable under one accuracy.
    class_of_item_.resize(n);
    std::vector<std::vector<uint8_t>> cols;
    std::vector<uint32_t> sizes;
    for (size_t i = 0; i < n; ++i) {
      std::vector<uint8_t> col(V);
      for (size_t v = 0; v < V; ++v) col[v] = vs_.rows[v][i];
      size_t cls = cols.size();
      for (size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] == col) {
          cls = k;
          break;
        }
      }
      if (cls == cols.size()) {
        cols.push_back(std::move(col));
        class_repr_.push_back(i);
        sizes.push_back(0);
      }
      class_of_item_[i] = static_cast<uint32_t>(cls);
      ++sizes[cls];
    }
    class_count_.assign(cols.size(), 0);
    for (uint32_t s : sizes) max_m = std::max(max_m, s);

    double p = acc.global;
    double q = 1.0 - p;
    pow_p_.resize(max_m + 1);
    pow_q_.resize(max_m + 1);
    pow_p_[0] = pow_q_[0] = 1.0;
    for (uint32_t k = 1; k <= max_m; ++k) {
      pow_p_[k] = pow_p_[k - 1] * p;
      pow_q_[k] = pow_q_[k - 1] * q;
    }
  }

  binom_.assign(max_m + 1, std::vector<double>(max_m + 1, 0.0));
  for (uint32_t a = 0; a <= max_m; ++a) {
    binom_[a][0] = 1.0;
    for (uint32_t b = 1; b <= a; ++b) {
      binom_[a][b] = binom_[a - 1][b - 1] + (b <= a - 1 ? binom_[a - 1][b] : 0.0);
    }
  }

  cum_.resize(V);
  double run = 0.0;
  for (size_t v = 0; v < V; ++v) {
    run += vs_.probabilities[v];
    cum_[v] = run;
  }
}

void ReductionEvaluator::clear() {
  selected_.clear();
  if (uniform_) std::fill(class_count_.begin(), class_count_.end(), 0u);
}

void ReductionEvaluator::push(size_t corr_index) {
  if (corr_index >= vs_.corr_count()) {
    throw domain_error("UnknownCorrespondence", "correspondence index out of range");
  }
  selected_.push_back(corr_index);
  if (uniform_) ++class_count_[class_of_item_[corr_index]];
}

void ReductionEvaluator::pop(size_t corr_index) {
  for (size_t k = selected_.size(); k > 0; --k) {
    if (selected_[k - 1] == corr_index) {
      selected_.erase(selected_.begin() + (k - 1));
      if (uniform_) --class_count_[class_of_item_[corr_index]];
      return;
    }
  }
  throw domain_error("UnknownCorrespondence", "pop of a correspondence that is not selected");
}

bool ReductionEvaluator::enumeration_blowup() const {
  size_t levels = 0;
  double leaves = 1.0;
  if (uniform_) {
    for (uint32_t c : class_count_) {
      if (c > 0) {
        ++levels;
        leaves *= c + 1.0;
      }
    }
  } else {
    levels = selected_.size();
    leaves = std::ldexp(1.0, static_cast<int>(std::min<size_t>(levels, 1024)));
  }
  return levels > 62 || leaves > 5e7;
}

double ReductionEvaluator::value(bool auto_monte_carlo) {
  ++evals_;
  if (opt_.mode == EvalMode::MonteCarlo) return mc_value();
  if (static_cast<int>(selected_.size()) > opt_.exact_cap || enumeration_blowup()) {
    if (auto_monte_carlo) return mc_value();
    std::ostringstream os;
    os << "exact evaluation over " << selected_.size()
       << " correspondences exceeds exact_cap=" << opt_.exact_cap
       << "; raise the cap or switch to monte_carlo";
    throw domain_error("CapExceeded", os.str());
  }
  return exact_value();
}

double ReductionEvaluator::exact_value() {
  if (selected_.empty()) return 0.0;
  const size_t V = vs_.view_count();

  lv_m_.clear();
  lv_item_.clear();
  if (uniform_) {
    for (size_t cls = 0; cls < class_count_.size(); ++cls) {
      if (class_count_[cls] > 0) {
        lv_m_.push_back(class_count_[cls]);
        lv_item_.push_back(class_repr_[cls]);
      }
    }
  } else {
    for (size_t i : selected_) {
      lv_m_.push_back(1);
      lv_item_.push_back(i);
    }
  }
  const size_t L = lv_m_.size();

  // Distinct truth patterns of the views restricted to the selected levels.
  pat_key_.clear();
  pat_prob_.clear();
  for (size_t v = 0; v < V; ++v) {
    double pv = vs_.probabilities[v];
    if (pv == 0.0) continue;
    uint64_t key = 0;
    for (size_t l = 0; l < L; ++l) {
      key |= static_cast<uint64_t>(vs_.rows[v][lv_item_[l]] != 0) << l;
    }
    size_t r = pat_key_.size();
    for (size_t k = 0; k < pat_key_.size(); ++k) {
      if (pat_key_[k] == key) {
        r = k;
        break;
      }
    }
    if (r == pat_key_.size()) {
      pat_key_.push_back(key);
      pat_prob_.push_back(pv);
    } else {
      pat_prob_[r] += pv;
    }
  }
  const size_t R = pat_key_.size();

  // fac_[off(l) + u*R + r]: likelihood factor of level l answering with u
  // "true" verdicts out of m_l, against pattern r.
  fac_off_.assign(L, 0);
  size_t total = 0;
  for (size_t l = 0; l < L; ++l) {
    fac_off_[l] = total;
    total += (lv_m_[l] + 1) * R;
  }
  fac_.resize(total);
  for (size_t l = 0; l < L; ++l) {
    const uint32_t m = lv_m_[l];
    const double pi = acc_by_item_[lv_item_[l]];
    const double qi = 1.0 - pi;
    const double lp[2] = {1.0, pi};
    const double lq[2] = {1.0, qi};
    const double* pp = uniform_ ? pow_p_.data() : lp;
    const double* qq = uniform_ ? pow_q_.data() : lq;
    for (uint32_t u = 0; u <= m; ++u) {
      double* f = fac_.data() + fac_off_[l] + static_cast<size_t>(u) * R;
      for (size_t r = 0; r < R; ++r) {
        bool bit = (pat_key_[r] >> l) & 1;
        f[r] = bit ? pp[u] * qq[m - u] : pp[m - u] * qq[u];
      }
    }
  }

  lrows_.assign((L + 1) * R, 0.0);
  for (size_t r = 0; r < R; ++r) lrows_[r] = 1.0;

  double sum_plnp = 0.0;
  auto rec = [&](auto&& self, size_t l, double mult) -> void {
    if (l == L) {
      const double* row = lrows_.data() + L * R;
      double p = 0.0;
      for (size_t r = 0; r < R; ++r) p += row[r] * pat_prob_[r];
      sum_plnp += mult * xlogx(p);
      return;
    }
    const uint32_t m = lv_m_[l];
    const double* src = lrows_.data() + l * R;
    double* dst = lrows_.data() + (l + 1) * R;
    for (uint32_t u = 0; u <= m; ++u) {
      const double* f = fac_.data() + fac_off_[l] + static_cast<size_t>(u) * R;
      for (size_t r = 0; r < R; ++r) dst[r] = src[r] * f[r];
      self(self, l + 1, mult * binom_[m][u]);
    }
  };
  rec(rec, 0, 1.0);

  double h_answers = -sum_plnp;
  double h_channel = 0.0;
  for (size_t i : selected_) h_channel += hconf_by_item_[i];
  return std::max(0.0, h_answers - h_channel);
}

double ReductionEvaluator::mc_value() {
  const size_t V = vs_.view_count();
  const size_t k = selected_.size();
  if (k == 0) return 0.0;

  uint64_t subset_hash = 0x9e3779b97f4a7c15ULL ^ splitmix64(k);
  for (size_t i : selected_) subset_hash ^= splitmix64(0x51ed2701 + i);
  Rng rng(mix_seed(opt_.mc_seed, subset_hash));

  // Canonical item order keeps the estimate independent of push history.
  lv_item_.assign(selected_.begin(), selected_.end());
  std::sort(lv_item_.begin(), lv_item_.end());

  mc_verdict_.resize(k);
  double h_sum = 0.0;
  for (int s = 0; s < opt_.mc_samples; ++s) {
    double u = rng.u01();
    size_t v = 0;
    while (v + 1 < V && u >= cum_[v]) ++v;
    for (size_t j = 0; j < k; ++j) {
      size_t item = lv_item_[j];
      bool agree = rng.u01() < acc_by_item_[item];
      uint8_t truth = vs_.rows[v][item];
      mc_verdict_[j] = agree ? truth : static_cast<uint8_t>(1 - truth);
    }
    double z = 0.0;
    double s_llnl = 0.0;
    for (size_t w = 0; w < V; ++w) {
      double like = vs_.probabilities[w];
      if (like == 0.0) continue;
      for (size_t j = 0; j < k; ++j) {
        size_t item = lv_item_[j];
        double pi = acc_by_item_[item];
        like *= (mc_verdict_[j] == vs_.rows[w][item]) ? pi : 1.0 - pi;
      }
      z += like;
      s_llnl += xlogx(like);
    }
    if (z > 0.0) h_sum += std::log(z) - s_llnl / z;
  }
  double h_cond = h_sum / opt_.mc_samples;
  return std::max(0.0, h_prior_ - h_cond);
}

namespace {

ReductionEvaluator make_pushed(const ViewSet& vs, const std::vector<std::string>& targets,
                               const PlanningAccuracy& acc, const EvalOptions& opt) {
  ReductionEvaluator ev(vs, acc, opt);
  std::set<size_t> seen;
  for (const std::string& id : targets) {
    size_t idx = vs.index_of(id);
    if (!seen.insert(idx).second) {
      throw domain_error("MalformedInput", "duplicate target correspondence \"" + id + "\"");
    }
    ev.push(idx);
  }
  return ev;
}

}  // namespace

double neg_conditional_entropy(const ViewSet& vs, const std::vector<std::string>& targets,
                               const PlanningAccuracy& acc, const EvalOptions& opt) {
  ReductionEvaluator ev = make_pushed(vs, targets, acc, opt);
  return ev.value(false) - ev.prior_entropy();
}

double expected_reduction(const ViewSet& vs, const std::vector<std::string>& targets,
                          const PlanningAccuracy& acc, const EvalOptions& opt) {
  ReductionEvaluator ev = make_pushed(vs, targets, acc, opt);
  return ev.value(false);
}

}  // namespace pm
