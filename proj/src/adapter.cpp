#include "cerm/adapter.hpp"

#include "cerm/csv.hpp"
#include "cerm/errors.hpp"
#include "cerm/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cerm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square(const MigrationMatrix& m, const char* what) {
    if (m.size() < 2) throw DataError(std::string(what) + ": need at least 2 ratings");
    if (m.p.size() != static_cast<std::size_t>(m.size()) * static_cast<std::size_t>(m.size()))
        throw DataError(std::string(what) + ": entry count does not match K x K");
}

} // namespace

ValidationReport MigrationMatrix::validate(double tol) const {
    ValidationReport rep;
    const int K = size();
    if (K < 2) {
        rep.violations.push_back("need at least 2 ratings");
        return rep;
    }
    if (p.size() != static_cast<std::size_t>(K) * static_cast<std::size_t>(K)) {
        rep.violations.push_back("entry count does not match K x K");
        return rep;
    }
    for (int i = 0; i < K; ++i) {
        double row = 0.0;
        for (int j = 0; j < K; ++j) {
            const double v = at(i, j);
            if (!std::isfinite(v)) rep.violations.push_back("non-finite probability in row " + ratings[static_cast<std::size_t>(i)]);
            if (v < -tol)
                rep.violations.push_back("negative probability in row " + ratings[static_cast<std::size_t>(i)]);
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-9)
            rep.violations.push_back("row " + ratings[static_cast<std::size_t>(i)] +
                                     " sums to " + format_double(row));
    }
    return rep;
}

ThresholdSet regulatory_thresholds(const MigrationMatrix& m_reg) {
    require_square(m_reg, "regulatory_thresholds");
    const auto rep = m_reg.validate();
    if (!rep.ok()) throw DataError("regulatory_thresholds: invalid matrix: " + rep.joined());

    const int K = m_reg.size();
    ThresholdSet out;
    out.K = K;
    out.z.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(K), 0.0);
    for (int i = 0; i < K; ++i) {
        out.at(i, 0) = kInf;
        double tail = 0.0;
        // accumulate from the default column backwards for accuracy
        std::vector<double> tails(static_cast<std::size_t>(K), 0.0);
        for (int j = K - 1; j >= 1; --j) {
            tail += m_reg.at(i, j);
            tails[static_cast<std::size_t>(j)] = tail;
        }
        for (int j = 1; j < K; ++j) {
            const double s = std::clamp(tails[static_cast<std::size_t>(j)], 0.0, 1.0);
            if (s <= 0.0)
                out.at(i, j) = -kInf;
            else if (s >= 1.0)
                out.at(i, j) = kInf;
            else
                out.at(i, j) = norm_quantile(s);
        }
    }
    return out;
}

MigrationMatrix migration_from_thresholds(const ThresholdSet& thresholds,
                                          const std::vector<double>& row_scale,
                                          const std::vector<std::string>& ratings) {
    const int K = thresholds.K;
    if (static_cast<int>(row_scale.size()) != K)
        throw ModelError("migration_from_thresholds: row_scale size mismatch");
    if (static_cast<int>(ratings.size()) != K)
        throw ModelError("migration_from_thresholds: ratings size mismatch");
    MigrationMatrix m;
    m.ratings = ratings;
    m.p.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(K), 0.0);
    for (int i = 0; i < K; ++i) {
        const double s = row_scale[static_cast<std::size_t>(i)];
        if (!(s > 0.0)) throw ModelError("migration_from_thresholds: nonpositive row scale");
        double upper = 1.0; // Phi(z_{i,0} / s) with z_{i,0} = +inf
        for (int j = 0; j < K; ++j) {
            const double lower =
                (j + 1 < K) ? norm_cdf(thresholds.at(i, j + 1) / s) : 0.0;
            m.at(i, j) = std::max(0.0, upper - lower);
            upper = lower;
        }
    }
    return m;
}

double basel_irb_correlation(double pd) {
    if (!(pd > 0.0 && pd < 1.0))
        throw ModelError("basel_irb_correlation: pd must lie in (0, 1)");
    const double w = -std::expm1(-50.0 * pd) / -std::expm1(-50.0);
    return 0.12 * w + 0.24 * (1.0 - w);
}

Vec3 initial_loading(const Vec3& alpha_micro, const Vec3& xi_1, const Mat3& c_1, double r_reg) {
    if (!(r_reg > 0.0 && r_reg < 1.0))
        throw ModelError("initial_loading: r_reg must lie in (0, 1)");
    const Vec3 a_tilde = hadamard(alpha_micro, xi_1);
    const double qf = quad_form(a_tilde, c_1);
    if (!(qf > 0.0)) throw ModelError("initial_loading: a~ . C1 a~ must be positive");
    return scaled(a_tilde, std::sqrt(r_reg / qf));
}

LoadingProfile make_loading_profile(std::string group, std::string rating,
                                    const Vec3& alpha_micro, const Vec3& xi_1, const Mat3& c_1,
                                    double r_reg) {
    LoadingProfile p;
    p.group = std::move(group);
    p.rating = std::move(rating);
    p.alpha_micro = alpha_micro;
    p.a_tilde_1 = hadamard(alpha_micro, xi_1);
    p.a1 = initial_loading(alpha_micro, xi_1, c_1, r_reg);
    p.r_reg = r_reg;
    return p;
}

PeriodLoadings period_loadings(const LoadingProfile& profile, const Vec3& alpha_micro_t,
                               const Vec3& xi_t, const Mat3& c_t) {
    // c_t = a1 * a~_t / a~_1 component-wise; a1 is a~_1 scaled by
    // sqrt(r_reg / a~_1.C1 a~_1), so the ratio collapses to that scalar and
    // zero components never divide.
    const Vec3 a_tilde_t = hadamard(alpha_micro_t, xi_t);
    double lambda = 0.0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        if (profile.a_tilde_1[k] != 0.0) {
            lambda = profile.a1[k] / profile.a_tilde_1[k];
            break;
        }
    }
    if (lambda == 0.0) throw ModelError("period_loadings: degenerate initial loading");

    PeriodLoadings out;
    out.c_t = scaled(a_tilde_t, lambda);
    const double c_quad = quad_form(out.c_t, c_t);
    out.normalizer = 1.0 + c_quad - profile.r_reg;
    if (!(out.normalizer > 0.0))
        throw ModelError("period_loadings: nonpositive asset-variance normalizer for (" +
                         profile.group + ", " + profile.rating + ")");
    out.r_t = c_quad / out.normalizer;
    out.a_t = scaled(out.c_t, 1.0 / std::sqrt(out.normalizer));
    return out;
}

MigrationMatrix conditioned_migration(const MigrationMatrix& m_reg,
                                      const ThresholdSet& thresholds,
                                      const std::vector<double>& row_normalizers) {
    require_square(m_reg, "conditioned_migration");
    if (thresholds.K != m_reg.size())
        throw ModelError("conditioned_migration: threshold/matrix size mismatch");
    std::vector<double> scale(row_normalizers.size());
    for (std::size_t i = 0; i < row_normalizers.size(); ++i) {
        if (!(row_normalizers[i] > 0.0))
            throw ModelError("conditioned_migration: nonpositive normalizer");
        scale[i] = std::sqrt(row_normalizers[i]);
    }
    return migration_from_thresholds(thresholds, scale, m_reg.ratings);
}

VarianceCheck normalized_asset_variance_check(const LoadingProfile& profile,
                                              const Vec3& alpha_micro_t, const Vec3& xi_t,
                                              const Mat3& c_t) {
    const PeriodLoadings pl = period_loadings(profile, alpha_micro_t, xi_t, c_t);
    VarianceCheck chk;
    chk.scale_residual =
        std::sqrt(pl.normalizer) - std::sqrt((1.0 - profile.r_reg) / (1.0 - pl.r_t));
    chk.loading_residual = quad_form(pl.a_t, c_t) - pl.r_t;
    return chk;
}

std::vector<std::string> Portfolio::groups() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (std::find(out.begin(), out.end(), e.group) == out.end()) out.push_back(e.group);
    return out;
}

MigrationMatrix Portfolio::matrix_for(const std::string& group) const {
    MigrationMatrix m;
    for (const auto& e : entries)
        if (e.group == group) {
            m.ratings.push_back(e.rating);
            m.p.insert(m.p.end(), e.migration_row.begin(), e.migration_row.end());
        }
    const int K = m.size();
    if (K == 0) throw DataError("portfolio has no group '" + group + "'");
    for (const auto& e : entries)
        if (e.group == group && static_cast<int>(e.migration_row.size()) != K)
            throw DataError("portfolio group '" + group + "': row '" + e.rating + "' has " +
                            std::to_string(e.migration_row.size()) + " probabilities, expected " +
                            std::to_string(K));
    return m;
}

Portfolio load_portfolio_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    t.require_columns({"group", "rating"});

    std::vector<std::string> prob_cols;
    for (const auto& c : t.columns)
        if (c.rfind("m", 0) == 0 && c.size() > 1 &&
            std::all_of(c.begin() + 1, c.end(), [](char ch) { return std::isdigit(ch); }))
            prob_cols.push_back(c);
    std::sort(prob_cols.begin(), prob_cols.end(), [](const std::string& a, const std::string& b) {
        return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
    });
    if (prob_cols.size() < 2)
        throw DataError("portfolio CSV: need migration probability columns m1..mK");

    const bool has_micro = t.has_column("alpha_E");
    if (has_micro) t.require_columns({"alpha_E", "alpha_P", "alpha_T"});

    Portfolio pf;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        PortfolioEntry e;
        e.group = t.cell(r, "group");
        e.rating = t.cell(r, "rating");
        for (const auto& c : prob_cols) e.migration_row.push_back(t.number(r, c));
        if (has_micro)
            e.alpha_micro = Vec3{t.number(r, "alpha_E"), t.number(r, "alpha_P"),
                                 t.number(r, "alpha_T")};
        pf.entries.push_back(std::move(e));
    }
    return pf;
}

const Vec3* MicroSchedule::find(const std::string& group, const std::string& rating,
                                long long t) const {
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (keys[i].t == t && keys[i].group == group && keys[i].rating == rating)
            return &values[i];
    return nullptr;
}

MicroSchedule load_micro_schedule_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    t.require_columns({"group", "rating", "t", "alpha_E", "alpha_P", "alpha_T"});
    MicroSchedule out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out.keys.push_back({t.cell(r, "group"), t.cell(r, "rating"),
                            static_cast<long long>(t.number(r, "t"))});
        out.values.push_back(
            Vec3{t.number(r, "alpha_E"), t.number(r, "alpha_P"), t.number(r, "alpha_T")});
    }
    return out;
}

std::vector<GroupMigrationSchedule> migrate_portfolio(const Portfolio& portfolio,
                                                      const MomentSchedule& schedule,
                                                      const CorrelationFn& correlation,
                                                      const MicroSchedule* micro) {
    if (schedule.horizons.empty() || schedule.horizons.front() != 1)
        throw ModelError("migrate_portfolio: the moment schedule must start at t = 1");
    const CorrelationFn corr = correlation ? correlation : basel_irb_correlation;
    const Vec3& xi_1 = schedule.xi.front();
    const Mat3& c_1 = schedule.corr.front();

    std::vector<GroupMigrationSchedule> out;
    for (const auto& group : portfolio.groups()) {
        const MigrationMatrix m_reg = portfolio.matrix_for(group);
        const auto rep = m_reg.validate();
        if (!rep.ok())
            throw DataError("portfolio group '" + group + "': " + rep.joined());
        const ThresholdSet z = regulatory_thresholds(m_reg);
        const int K = m_reg.size();

        std::vector<LoadingProfile> profiles;
        std::vector<Vec3> base_micro;
        profiles.reserve(static_cast<std::size_t>(K));
        int row = 0;
        for (const auto& e : portfolio.entries) {
            if (e.group != group) continue;
            const double pd = m_reg.at(row, K - 1);
            if (!(pd > 0.0 && pd < 1.0))
                throw ModelError("portfolio group '" + group + "', rating '" + e.rating +
                                 "': default probability must lie in (0, 1) for the "
                                 "regulator correlation");
            Vec3 alpha_1 = e.alpha_micro;
            if (micro)
                if (const Vec3* o = micro->find(group, e.rating, 1)) alpha_1 = *o;
            profiles.push_back(
                make_loading_profile(group, e.rating, alpha_1, xi_1, c_1, corr(pd)));
            base_micro.push_back(e.alpha_micro);
            ++row;
        }

        GroupMigrationSchedule sched;
        sched.group = group;
        for (std::size_t k = 0; k < schedule.horizons.size(); ++k) {
            const long long t = schedule.horizons[k];
            std::vector<double> normalizers;
            normalizers.reserve(profiles.size());
            for (std::size_t i = 0; i < profiles.size(); ++i) {
                Vec3 alpha_t = base_micro[i];
                if (micro)
                    if (const Vec3* o = micro->find(group, profiles[i].rating, t)) alpha_t = *o;
                try {
                    normalizers.push_back(
                        period_loadings(profiles[i], alpha_t, schedule.xi[k], schedule.corr[k])
                            .normalizer);
                } catch (const ModelError& ex) {
                    throw ModelError(std::string(ex.what()) + " at t = " + std::to_string(t));
                }
            }
            sched.horizons.push_back(t);
            sched.matrices.push_back(conditioned_migration(m_reg, z, normalizers));
        }
        out.push_back(std::move(sched));
    }
    return out;
}

void write_migration_tensor_csv(const std::vector<GroupMigrationSchedule>& schedules,
                                const std::filesystem::path& path,
                                const std::string& meta_comment) {
    CsvWriter w(path, meta_comment);
    w.header({"t", "group", "rating_from", "rating_to", "probability"});
    for (const auto& s : schedules)
        for (std::size_t k = 0; k < s.horizons.size(); ++k) {
            const MigrationMatrix& m = s.matrices[k];
            for (int i = 0; i < m.size(); ++i)
                for (int j = 0; j < m.size(); ++j) {
                    w.field(s.horizons[k]);
                    w.field(s.group);
                    w.field(m.ratings[static_cast<std::size_t>(i)]);
                    w.field(m.ratings[static_cast<std::size_t>(j)]);
                    w.field(m.at(i, j));
                    w.end_row();
                }
        }
}

} // namespace cerm
