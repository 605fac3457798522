#include "globenv/linear_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace globenv {

std::vector<std::size_t> Grouping::counts() const {
    std::vector<std::size_t> c(static_cast<std::size_t>(levels), 0);
    for (int l : labels) ++c[static_cast<std::size_t>(l)];
    return c;
}

Grouping Grouping::from_strings(std::span<const std::string> values) {
    Grouping g;
    std::map<std::string, int> index;
    for (const std::string& v : values) {
        auto [it, inserted] = index.emplace(v, g.levels);
        if (inserted) {
            g.names.push_back(v);
            ++g.levels;
        }
        g.labels.push_back(it->second);
    }
    return g;
}

Grouping Grouping::from_labels(std::vector<int> labels) {
    Grouping g;
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw Error(ErrorCode::InvalidArgument, "group labels must be non-negative");
        max_label = std::max(max_label, l);
    }
    g.levels = max_label + 1;
    g.labels = std::move(labels);
    for (int j = 0; j < g.levels; ++j) g.names.push_back(std::to_string(j));
    return g;
}

void FactorTable::add_continuous(std::string name, std::vector<double> values) {
    if (values.size() != n_) throw Error(ErrorCode::DimensionMismatch, "factor '" + name + "' has the wrong length");
    Factor f;
    f.name = std::move(name);
    f.kind = Factor::Kind::Continuous;
    f.values = std::move(values);
    factors_.push_back(std::move(f));
}

void FactorTable::add_categorical(std::string name, Grouping groups) {
    if (groups.size() != n_) throw Error(ErrorCode::DimensionMismatch, "factor '" + name + "' has the wrong length");
    for (std::size_t c : groups.counts())
        if (c == 0) throw Error(ErrorCode::InvalidArgument, "factor '" + name + "' has an empty level");
    Factor f;
    f.name = std::move(name);
    f.kind = Factor::Kind::Categorical;
    f.groups = std::move(groups);
    factors_.push_back(std::move(f));
}

const Factor* FactorTable::find(std::string_view name) const {
    for (const Factor& f : factors_)
        if (f.name == name) return &f;
    return nullptr;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return parts;
}

struct EncodedFactor {
    Matrix columns;    // n x q
    Matrix expansion;  // levels x q
    std::vector<std::string> names;
    bool categorical = false;
};

EncodedFactor encode(const FactorTable& table, const std::string& name,
                     std::span<const std::pair<std::string, std::vector<double>>> varying) {
    const auto n = static_cast<Eigen::Index>(table.rows());
    EncodedFactor out;
    for (const auto& [vname, values] : varying) {
        if (vname != name) continue;
        if (static_cast<Eigen::Index>(values.size()) != n)
            throw Error(ErrorCode::DimensionMismatch, "regressor '" + name + "' has the wrong length");
        out.columns = Eigen::Map<const Vector>(values.data(), n);
        out.expansion = Matrix::Ones(1, 1);
        out.names = {name};
        return out;
    }
    const Factor* f = table.find(name);
    if (f == nullptr) throw Error(ErrorCode::UnknownTerm, "unknown factor '" + name + "'");
    if (f->kind == Factor::Kind::Continuous) {
        out.columns = Eigen::Map<const Vector>(f->values.data(), n);
        out.expansion = Matrix::Ones(1, 1);
        out.names = {name};
        return out;
    }
    const int levels = f->groups.levels;
    if (levels < 2) throw Error(ErrorCode::RankDeficient, "factor '" + name + "' has a single level");
    const Eigen::Index q = levels - 1;
    out.categorical = true;
    out.columns = Matrix::Zero(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int l = f->groups.labels[static_cast<std::size_t>(i)];
        if (l == levels - 1)
            out.columns.row(i).setConstant(-1.0);
        else
            out.columns(i, l) = 1.0;
    }
    out.expansion = Matrix::Zero(levels, q);
    out.expansion.topRows(q).setIdentity();
    out.expansion.row(q).setConstant(-1.0);
    for (int l = 0; l < levels; ++l) out.names.push_back(name + "[" + f->groups.names[static_cast<std::size_t>(l)] + "]");
    return out;
}

EncodedFactor encode_term(const FactorTable& table, const Term& term,
                          std::span<const std::pair<std::string, std::vector<double>>> varying) {
    EncodedFactor acc = encode(table, term.front(), varying);
    for (std::size_t t = 1; t < term.size(); ++t) {
        const EncodedFactor next = encode(table, term[t], varying);
        const Eigen::Index n = acc.columns.rows();
        const Eigen::Index qa = acc.columns.cols(), qb = next.columns.cols();
        Matrix cols(n, qa * qb);
        for (Eigen::Index a = 0; a < qa; ++a)
            for (Eigen::Index b = 0; b < qb; ++b) cols.col(a * qb + b) = acc.columns.col(a).cwiseProduct(next.columns.col(b));
        Matrix expansion(acc.expansion.rows() * next.expansion.rows(), qa * qb);
        for (Eigen::Index la = 0; la < acc.expansion.rows(); ++la)
            for (Eigen::Index lb = 0; lb < next.expansion.rows(); ++lb)
                for (Eigen::Index a = 0; a < qa; ++a)
                    for (Eigen::Index b = 0; b < qb; ++b)
                        expansion(la * next.expansion.rows() + lb, a * qb + b) =
                            acc.expansion(la, a) * next.expansion(lb, b);
        std::vector<std::string> names;
        for (const std::string& na : acc.names)
            for (const std::string& nb : next.names) names.push_back(na + ":" + nb);
        acc.columns = std::move(cols);
        acc.expansion = std::move(expansion);
        acc.names = std::move(names);
        acc.categorical = acc.categorical || next.categorical;
    }
    return acc;
}

std::set<std::string> term_key(const Term& t) { return {t.begin(), t.end()}; }

}  // namespace

std::vector<Term> parse_formula(std::string_view formula) {
    const auto tilde = formula.find('~');
    const std::string_view rhs = tilde == std::string_view::npos ? formula : formula.substr(tilde + 1);
    std::vector<Term> terms;
    for (const std::string& part : split(rhs, '+')) {
        if (part.empty() || part == "1") continue;
        Term term = split(part, ':');
        for (const std::string& f : term)
            if (f.empty()) throw Error(ErrorCode::UnknownTerm, "malformed term '" + part + "'");
        terms.push_back(std::move(term));
    }
    return terms;
}

std::string term_label(const Term& term) {
    std::string out;
    for (std::size_t i = 0; i < term.size(); ++i) out += (i ? ":" : "") + term[i];
    return out;
}

std::size_t DesignPair::tested_count() const {
    std::size_t k = 0;
    for (const TermBlock& b : tested_terms) k += b.names.size();
    return k;
}

DesignPair build_design(const FactorTable& factors, std::span<const Term> full_terms,
                        std::span<const Term> reduced_terms,
                        std::span<const std::pair<std::string, std::vector<double>>> varying) {
    std::set<std::set<std::string>> full_keys, reduced_keys;
    for (const Term& t : full_terms) {
        if (t.empty()) throw Error(ErrorCode::UnknownTerm, "empty term");
        if (!full_keys.insert(term_key(t)).second)
            throw Error(ErrorCode::UnknownTerm, "term '" + term_label(t) + "' repeated");
    }
    for (const Term& t : reduced_terms) {
        if (!full_keys.count(term_key(t)))
            throw Error(ErrorCode::UnknownTerm, "reduced term '" + term_label(t) + "' is not in the full model");
        reduced_keys.insert(term_key(t));
    }
    if (reduced_keys.size() == full_keys.size())
        throw Error(ErrorCode::UnknownTerm, "the full and reduced models coincide; nothing to test");

    const auto n = static_cast<Eigen::Index>(factors.rows());
    std::vector<Matrix> full_blocks{Matrix::Ones(n, 1)};
    std::vector<Matrix> reduced_blocks{Matrix::Ones(n, 1)};
    DesignPair out;
    std::size_t column = 1;
    for (const Term& t : full_terms) {
        EncodedFactor enc = encode_term(factors, t, varying);
        const auto q = static_cast<std::size_t>(enc.columns.cols());
        if (reduced_keys.count(term_key(t))) {
            reduced_blocks.push_back(enc.columns);
        } else {
            TermBlock block;
            block.label = term_label(t);
            for (std::size_t c = 0; c < q; ++c) {
                block.columns.push_back(column + c);
                out.tested_columns.push_back(column + c);
            }
            block.expansion = std::move(enc.expansion);
            block.names = std::move(enc.names);
            block.categorical = enc.categorical;
            out.tested_terms.push_back(std::move(block));
        }
        full_blocks.push_back(std::move(enc.columns));
        column += q;
    }
    auto stack = [n](const std::vector<Matrix>& blocks) {
        Eigen::Index p = 0;
        for (const Matrix& b : blocks) p += b.cols();
        Matrix m(n, p);
        Eigen::Index c = 0;
        for (const Matrix& b : blocks) {
            m.middleCols(c, b.cols()) = b;
            c += b.cols();
        }
        return m;
    };
    out.full = stack(full_blocks);
    out.reduced = stack(reduced_blocks);
    if (out.full.cols() >= n)
        throw Error(ErrorCode::RankDeficient, "the full model has " + std::to_string(out.full.cols()) +
                                                  " parameters for " + std::to_string(n) + " observations");
    Eigen::ColPivHouseholderQR<Matrix> qr(out.full);
    if (qr.rank() < out.full.cols()) throw Error(ErrorCode::RankDeficient, "the full design is rank deficient");
    return out;
}

LeastSquares::LeastSquares(const Matrix& design) {
    const Eigen::Index n = design.rows(), p = design.cols();
    if (p > n) throw Error(ErrorCode::RankDeficient, "more parameters than observations");
    Eigen::HouseholderQR<Matrix> qr(design);
    q_ = qr.householderQ() * Matrix::Identity(n, p);
    const Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const double scale = r.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < p; ++j)
        if (!(std::abs(r(j, j)) > 1e-10 * scale)) throw Error(ErrorCode::RankDeficient, "design is rank deficient");
    pinv_ = r.triangularView<Eigen::Upper>().solve(q_.transpose());
}

Matrix LeastSquares::coefficients(const Matrix& y) const { return pinv_ * y; }

Matrix LeastSquares::fitted(const Matrix& y) const { return q_ * (q_.transpose() * y); }

Matrix LeastSquares::residuals(const Matrix& y) const { return y - fitted(y); }

Vector freedman_lane_permute(const Vector& y, const Matrix& reduced, std::span<const std::size_t> perm) {
    if (static_cast<Eigen::Index>(perm.size()) != y.size() || reduced.rows() != y.size())
        throw Error(ErrorCode::DimensionMismatch, "permutation, response and design lengths differ");
    const LeastSquares fit(reduced);
    const Vector e = fit.residuals(y);
    Vector out = y;
    // y + (P e - e) equals fitted + P e and is bitwise y for the identity
    for (Eigen::Index i = 0; i < y.size(); ++i) out(i) += e(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])) - e(i);
    return out;
}

}  // namespace globenv
