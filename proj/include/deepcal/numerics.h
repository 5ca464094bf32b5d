#ifndef DEEPCAL_NUMERICS_H_
#define DEEPCAL_NUMERICS_H_

#include <cstddef>
#include <span>

namespace deepcal {

// Fixed-order pairwise summation. The split points depend only on the length
// of the input, so the result does not depend on how the values were
// produced (serially or by any number of workers).
double PairwiseSum(std::span<const double> values);

// Worker cap for internal parallel loops. Zero restores the default (all
// logical cores, or DEEPCAL_THREADS when set).
void SetThreadCount(int threads);
int ThreadCount();

}  // namespace deepcal

#endif  // DEEPCAL_NUMERICS_H_
