#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include "bytesort/baselines.hpp"
#include "bytesort/ndmath.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

// Builds a random net of 1..3 layers (dropout off), a random batch and a
// random linear functional of the output, then compares backward() against
// central differences for every parameter and input entry.
GradCheck random_net_gradient_check(std::uint64_t seed, double h = 1e-5);

// Two Adam steps on a scalar, written out term by term.
struct AdamTwoSteps {
    double after_first;
    double after_second;
};
AdamTwoSteps adam_two_steps(double w0, double g1, double g2, const bytesort::AdamConfig& c);

// Brute-force kNN: all distances, stable order by (distance, index), then
// majority vote; ties go to the smaller summed distance, then the lower label.
std::size_t knn_brute_force(const std::vector<bytesort::Histogram>& points, const std::vector<std::size_t>& labels,
                            std::size_t k, const bytesort::Histogram& query);

} // namespace oracle
