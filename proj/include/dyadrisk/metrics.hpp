#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace dyadrisk {

// (true, predicted) class-index pairs.
using LabelPairs = std::vector<std::pair<int, int>>;

// K x K counts; rows = true class, columns = predicted.
std::vector<std::vector<std::size_t>> confusion_matrix(const LabelPairs& pairs, int k);

// Unweighted mean of per-class recall over classes 0..max(true); errors if
// any class in that range has no true samples.
double macro_recall(const LabelPairs& pairs);

// Same mean but only over classes that actually appear among the true
// labels; used for validation scoring where small splits may miss a class.
double macro_recall_present(const LabelPairs& pairs);

}  // namespace dyadrisk
