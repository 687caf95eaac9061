#include "veritas/agreement.hpp"

#include <sstream>

#include "veritas/numfmt.hpp"

namespace veritas::agreement {

AgreementReport agreement(const LabelSequence& a, const LabelSequence& b) {
    if (a.labels.empty() || a.labels.size() != b.labels.size()) {
        throw LengthMismatchError();
    }
    if (a.dimension != b.dimension) throw DimensionMismatchError();

    AgreementReport report;
    report.n = static_cast<long long>(a.labels.size());
    for (size_t i = 0; i < a.labels.size(); ++i) {
        const int x = a.labels[i];
        const int y = b.labels[i];
        if ((x != 0 && x != 1) || (y != 0 && y != 1)) throw LabelDomainError();
        if (x == 1 && y == 1) ++report.confusion.a;
        else if (x == 1 && y == 0) ++report.confusion.b;
        else if (x == 0 && y == 1) ++report.confusion.c;
        else ++report.confusion.d;
    }

    const auto& cm = report.confusion;
    const double n = static_cast<double>(report.n);
    const double p_o = static_cast<double>(cm.a + cm.d) / n;
    const double p_e =
        (static_cast<double>(cm.a + cm.b) * static_cast<double>(cm.a + cm.c) +
         static_cast<double>(cm.c + cm.d) * static_cast<double>(cm.b + cm.d)) /
        (n * n);

    report.consistent_ratio = p_o;
    if (p_e >= 1.0) {
        report.degenerate_marginals = true;
        report.kappa = (p_o == 1.0) ? 1.0 : 0.0;
    } else {
        report.kappa = (p_o - p_e) / (1.0 - p_e);
    }
    return report;
}

std::vector<std::vector<AgreementReport>> pairwise_matrix(
    std::span<const LabelSequence> sequences) {
    const size_t k = sequences.size();
    std::vector<std::vector<AgreementReport>> matrix(
        k, std::vector<AgreementReport>(k));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i; j < k; ++j) {
            AgreementReport r = agreement(sequences[i], sequences[j]);
            matrix[i][j] = r;
            if (i != j) {
                std::swap(r.confusion.b, r.confusion.c);
                matrix[j][i] = r;
            }
        }
    }
    return matrix;
}

std::string matrix_to_csv(
    const std::vector<std::vector<AgreementReport>>& matrix,
    std::span<const LabelSequence> sequences) {
    std::ostringstream os;
    os << "rater";
    for (const LabelSequence& s : sequences) os << "," << s.rater;
    os << "\n";
    for (size_t i = 0; i < matrix.size(); ++i) {
        os << sequences[i].rater;
        for (size_t j = 0; j < matrix[i].size(); ++j) {
            os << "," << format_number(matrix[i][j].kappa);
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace veritas::agreement
