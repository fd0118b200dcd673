#pragma once

#include <vector>

#include "svocal/dataset.hpp"

namespace svocal::testsupport {

// 952 characters across 192 books whose per-attribute value marginals
// reproduce the reference majority-baseline scores: gender weighted F1
// 0.562, age weighted F1 0.661, age soft F1 0.909, type stage-1 0.910,
// spoken languages micro F1 0.576.
std::vector<GoldRecord> synthetic_gold();

}  // namespace svocal::testsupport
