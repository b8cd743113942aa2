#pragma once

#include "adaptisent/encoder.hpp"

namespace adaptisent {

struct AlignedPair {
    VarId e_t_prime; // 1 x d
    VarId e_i_prime; // 1 x d
    VarId distance;  // 1 x 1 squared Euclidean distance
};

// Modality-specific affine maps into the shared space plus the squared
// distance between the projected pair.
AlignedPair project_pair(Tape& tape, const ParamVars& pv, VarId e_t, VarId e_i);

// lambda * sum of pair distances; a plain zero when the alignment switch is
// off or there are no pairs.
VarId alignment_regularizer(Tape& tape, const std::vector<VarId>& distances, double lambda,
                            bool no_alignment);

// Cosine similarity of two row vectors; rejects zero-norm input.
double coherence(const Tensor& a, const Tensor& b);

} // namespace adaptisent
