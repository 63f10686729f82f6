#pragma once

#include <string>

#include "ctel/classical.hpp"
#include "ctel/quantum.hpp"

namespace ctel {

// One self-contained structured record per line, parseable without the
// summary. Ground-truth fields carry a truth_ prefix to mark them as
// verification-only.
std::string trial_record_line(const TrialRecord& record);
std::string quantum_record_line(const QuantumTrialRecord& record);

}  // namespace ctel
