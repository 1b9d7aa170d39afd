#include "promptmatcher/update.hpp"

#include <cmath>
#include <sstream>

#include "promptmatcher/errors.hpp"

namespace pm {

ViewSet apply_answer(const ViewSet& vs, const Answer& a) {
  if (!(a.confidence >= 0.5) || a.confidence > 1.0) {
    std::ostringstream os;
    os << "answer confidence must lie in [0.5, 1], got " << a.confidence;
    throw domain_error("MalformedInput", os.str());
  }
  size_t col = vs.index_of(a.corr_id);
  ViewSet out = vs;
  double z = 0.0;
  for (size_t v = 0; v < out.view_count(); ++v) {
    bool agree = (out.rows[v][col] != 0) == a.verdict;
    out.probabilities[v] *= agree ? a.confidence : 1.0 - a.confidence;
    z += out.probabilities[v];
  }
  if (!(z > 0.0)) {
    throw domain_error("InconsistentAnswer",
                       "answer on \"" + a.corr_id +
                           "\" with confidence 1 contradicts every view of nonzero probability");
  }
  for (double& p : out.probabilities) p /= z;
  return out;
}

ViewSet apply_family(const ViewSet& vs, const AnswerFamily& fam) {
  if (fam.verdicts.size() != fam.corr_ids.size() || fam.confidences.size() != fam.corr_ids.size()) {
    throw domain_error("MalformedInput", "answer family fields must have equal lengths");
  }
  ViewSet out = vs;
  for (size_t i = 0; i < fam.corr_ids.size(); ++i) {
    Answer a;
    a.corr_id = fam.corr_ids[i];
    a.verdict = fam.verdicts[i] != 0;
    a.confidence = fam.confidences[i];
    out = apply_answer(out, a);
  }
  return out;
}

}  // namespace pm
