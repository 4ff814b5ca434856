#pragma once

#include <string>
#include <vector>

#include "procomplete/process_model.hpp"

namespace fixtures {

/// University-admission excerpt: start, "Check documents", "Evaluate", an
/// exclusive split to "Invite to an aptitude test" / "Keep in the applicant
/// pool", a merge, "Rank students according to GPA and the test results", end.
extern const char* const kAdmissionXml;
procomplete::ProcessGraph admission();

/// Processes A: x->y->z->a and B: x->y->z->b (task chains, no events).
procomplete::ProcessGraph chain_process(const std::string& id,
                                        const std::vector<std::string>& labels);
std::vector<procomplete::ProcessGraph> ab_corpus();
/// C: x->y->z, the model under construction.
procomplete::ProcessGraph query_c();

}  // namespace fixtures
