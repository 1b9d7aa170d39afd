#pragma once

#include "model.hpp"
#include "objective.hpp"
#include "oracle.hpp"

namespace pm {

// Posterior over views given one answer: each view's probability is scaled
// by (confidence if the verdict agrees with the view, else 1 - confidence)
// and the result renormalized. Views are kept even at probability zero.
// Throws InconsistentAnswer when everything is annihilated and
// UnknownCorrespondence / MalformedInput on bad input.
ViewSet apply_answer(const ViewSet& vs, const Answer& a);

// Sequential application over the family, in family order. Equivalent to a
// single joint update because answers are conditionally independent given
// the view.
ViewSet apply_family(const ViewSet& vs, const AnswerFamily& fam);

}  // namespace pm
