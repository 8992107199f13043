#pragma once

#include <variant>

#include "cavity/evolution.hpp"

namespace cavity {

using Matrix4 = Eigen::Matrix4cd;

struct ConcurrenceValue {
    double value = 0.0;
};

struct EofValue {
    double value = 0.0;
};

/// Wootters concurrence max(0, l1 - l2 - l3 - l4), l_i the decreasing square roots
/// of the eigenvalues of rho (sy x sy) rho^* (sy x sy), conjugation taken in the
/// product basis |00>, |01>, |10>, |11> of `rho`. Throws NotAState.
ConcurrenceValue wootters_concurrence(const Matrix4& rho);

/// -x log2 x - (1-x) log2 (1-x), continuous at the endpoints.
double binary_entropy(double x);

/// h(1/2 + sqrt(1 - C^2)/2). Throws OutOfRange unless 0 <= C <= 1.
EofValue eof_from_concurrence(ConcurrenceValue c);

/// Restriction of a two-mode state to span{|0>,|1>} (x) span{|0>,|1>}.
struct QubitBlock {
    Matrix4 rho;
    /// Population outside the block.
    double leakage = 0.0;
};

QubitBlock qubit_block(const TwoModeDensityMatrix& rho);

struct SinglePhotonScenario {};
struct SuperpositionScenario {
    double theta = 0.0;
};
struct BellScenario {
    BellStateIndex index;
};
using ConcurrenceScenario = std::variant<SinglePhotonScenario, SuperpositionScenario, BellScenario>;

/// Analytic concurrence trajectories. Bell states 1 and 2 require gamma == 0
/// (QutritRegime otherwise).
ConcurrenceValue closed_form_concurrence(const ConcurrenceScenario& scenario,
                                         const ModelParams& params, double t);

enum class BranchOrder { plus_first, minus_first };

/// Orthonormal basis {e0, e1} of span{|first>, |second>} for two coherent states,
/// with |first> = e0 and |second> = overlap e0 + orthogonal_weight e1.
struct BranchBasis {
    Complex first;
    Complex second;
    Complex overlap;                // <first|second>
    double orthogonal_weight = 0.0;  // sqrt(1 - |overlap|^2)
    bool degenerate = false;         // 1 - |overlap|^2 < 1e-12

    /// e0 and e1 as truncated Fock vectors (columns). e1 is zero when degenerate.
    Matrix vectors(FockCutoff cutoff) const;
};

/// Evolved cat state expressed in the branch bases of both modes.
struct EffectiveTwoQubitState {
    Matrix4 matrix;
    BranchBasis basis_a;
    BranchBasis basis_b;
    BranchOrder order = BranchOrder::plus_first;

    /// A one-dimensional factor cannot carry entanglement.
    bool separable_by_degeneracy() const { return basis_a.degenerate || basis_b.degenerate; }
};

EffectiveTwoQubitState effective_two_qubit(const CatTrajectory& traj,
                                           BranchOrder order = BranchOrder::plus_first);

/// Concurrence of the embedded state; 0 when either mode is degenerate.
ConcurrenceValue concurrence(const EffectiveTwoQubitState& state);

/// Reduced state of mode A in its branch basis.
Eigen::Matrix2cd reduced_state_a(const EffectiveTwoQubitState& state);

}  // namespace cavity
