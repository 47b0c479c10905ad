#pragma once

#include <cstdint>
#include <string>

#include "timelyrec/data.hpp"
#include "timelyrec/model.hpp"

namespace timelyrec {

// Attention inspection report for one (user, item, time) triple: per
// granularity the target slot, the surrounding-slot weights (raw and
// rescaled so the target reads 1.0) and the importance gate; per history
// entry its calendar fields and similarity score; the final score.
std::string explain_text(const Model& model, const Dataset& dataset,
                         const std::string& user_external,
                         const std::string& item_external, std::int64_t time,
                         const SplitSpec& split);

}  // namespace timelyrec
