#include "adaptisent/alignment.hpp"

#include <cmath>

namespace adaptisent {

AlignedPair project_pair(Tape& tape, const ParamVars& pv, VarId e_t, VarId e_i) {
    if (tape.val(e_t).rows() != 1 || tape.val(e_i).rows() != 1)
        throw ShapeError("project_pair: expected row vectors");
    AlignedPair pair;
    pair.e_t_prime = tape.add(tape.matmul(e_t, pv.align_text_w), pv.align_text_b);
    pair.e_i_prime = tape.add(tape.matmul(e_i, pv.align_vis_w), pv.align_vis_b);
    VarId diff = tape.sub(pair.e_t_prime, pair.e_i_prime);
    pair.distance = tape.sum_all(tape.mul(diff, diff));
    return pair;
}

VarId alignment_regularizer(Tape& tape, const std::vector<VarId>& distances, double lambda,
                            bool no_alignment) {
    if (lambda < 0.0) throw ConfigError("alignment_regularizer: lambda must be >= 0");
    if (no_alignment || distances.empty() || lambda == 0.0) return tape.leaf(Tensor(1, 1, 0.0));
    VarId total = distances[0];
    for (std::size_t i = 1; i < distances.size(); ++i) total = tape.add(total, distances[i]);
    return tape.scale(total, lambda);
}

double coherence(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size() || a.size() == 0) throw ShapeError("coherence: size mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw NumericError("coherence: zero-norm input");
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    // clamp floating-point spill past the valid range
    return std::min(1.0, std::max(-1.0, c));
}

} // namespace adaptisent
