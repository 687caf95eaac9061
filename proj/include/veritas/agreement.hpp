#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "veritas/metrics.hpp"

// Two-rater agreement statistics over binary label sequences: raw consistent
// ratio and Cohen's kappa, with explicit handling of degenerate marginals.

namespace veritas::agreement {

struct LabelSequence {
    std::vector<int> labels;  // binary
    std::string rater;
    metrics::FaithDimension dimension = metrics::FaithDimension::InfoThink;
};

struct Confusion {
    long long a = 0;  // both 1
    long long b = 0;  // first 1, second 0
    long long c = 0;  // first 0, second 1
    long long d = 0;  // both 0

    bool operator==(const Confusion&) const = default;
};

struct AgreementReport {
    long long n = 0;
    double consistent_ratio = 0.0;
    double kappa = 0.0;
    Confusion confusion;
    // Both raters constant with the same value: chance agreement is 1 and
    // the kappa formula is 0/0. By convention kappa is 1 on perfect
    // agreement, else 0.
    bool degenerate_marginals = false;
};

class LengthMismatchError : public std::runtime_error {
public:
    LengthMismatchError()
        : std::runtime_error("label sequences differ in length or are empty") {}
};

class DimensionMismatchError : public std::runtime_error {
public:
    DimensionMismatchError()
        : std::runtime_error("label sequences cover different dimensions") {}
};

class LabelDomainError : public std::runtime_error {
public:
    LabelDomainError() : std::runtime_error("labels must be 0 or 1") {}
};

AgreementReport agreement(const LabelSequence& a, const LabelSequence& b);

/// Symmetric matrix of pairwise reports; the diagonal is self-agreement
/// (ratio 1, kappa 1).
std::vector<std::vector<AgreementReport>> pairwise_matrix(
    std::span<const LabelSequence> sequences);

/// Kappa matrix as CSV with rater names on both axes.
std::string matrix_to_csv(
    const std::vector<std::vector<AgreementReport>>& matrix,
    std::span<const LabelSequence> sequences);

}  // namespace veritas::agreement
