#include "cerm/simulator.hpp"

#include "cerm/csv.hpp"
#include "cerm/errors.hpp"
#include "cerm/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

namespace cerm {

namespace {

constexpr std::uint64_t kBlockPaths = 4096;
constexpr std::uint32_t kDumpMagic = 0x4D524543u; // "CERM" little-endian
constexpr std::uint32_t kDumpVersion = 1u;

static_assert(std::endian::native == std::endian::little,
              "path dump format assumes a little-endian host");

// Symmetric 3x3 packed order: EE, EP, ET, PP, PT, TT.
constexpr int kSymIdx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

struct SnapAcc {
    double s1[3]{};
    double s1_prev[3]{};
    double s2[6]{};
    double s4[6]{};
    double cross[9]{};
    double cross2[9]{};
    double l1 = 0, l2 = 0, l3 = 0, l4 = 0;
    double dp1 = 0, dp2 = 0, g1 = 0, g2 = 0, dpg = 0;
    std::uint64_t n = 0, c_neg = 0, c_pos = 0, c_both = 0;

    void add(const double y[3], const double y_prev[3], double l, double dp, double g) {
        ++n;
        for (int i = 0; i < 3; ++i) {
            s1[i] += y[i];
            s1_prev[i] += y_prev[i];
        }
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const double prod = y[i] * y[j];
                s2[kSymIdx[i][j]] += prod;
                s4[kSymIdx[i][j]] += prod * prod;
            }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double prod = y[i] * y_prev[j];
                cross[3 * i + j] += prod;
                cross2[3 * i + j] += prod * prod;
            }
        l1 += l;
        l2 += l * l;
        l3 += l * l * l;
        l4 += l * l * l * l;
        dp1 += dp;
        dp2 += dp * dp;
        g1 += g;
        g2 += g * g;
        dpg += dp * g;
        if (dp < 0.0) ++c_neg;
        if (g > 0.0) {
            ++c_pos;
            if (dp < 0.0) ++c_both;
        }
    }

    void merge(const SnapAcc& o) {
        for (int i = 0; i < 3; ++i) {
            s1[i] += o.s1[i];
            s1_prev[i] += o.s1_prev[i];
        }
        for (int i = 0; i < 6; ++i) {
            s2[i] += o.s2[i];
            s4[i] += o.s4[i];
        }
        for (int i = 0; i < 9; ++i) {
            cross[i] += o.cross[i];
            cross2[i] += o.cross2[i];
        }
        l1 += o.l1;
        l2 += o.l2;
        l3 += o.l3;
        l4 += o.l4;
        dp1 += o.dp1;
        dp2 += o.dp2;
        g1 += o.g1;
        g2 += o.g2;
        dpg += o.dpg;
        n += o.n;
        c_neg += o.c_neg;
        c_pos += o.c_pos;
        c_both += o.c_both;
    }

    Mat3 covariance() const {
        Mat3 c;
        if (n < 2) return c;
        const double nn = static_cast<double>(n);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const double v =
                    (s2[kSymIdx[i][j]] - s1[i] * s1[j] / nn) / (nn - 1.0);
                c(i, j) = c(j, i) = v;
            }
        return c;
    }
};

struct CenteredModel {
    double e, theta, alpha, gamma, p, q, beta;

    struct State {
        double yp_prev = 0.0;
    };

    Vec3 initial_levels() const { return Vec3{0.0, 0.0, 0.0}; }
    void begin_path(State&) const {}

    void advance(State& st, const std::array<double, 3>& eps, double y[3], double& l, double& dp,
                 double& g) const {
        y[kE] = e * eps[0];
        y[kP] = q * st.yp_prev + gamma * e * eps[0] - (alpha + gamma) * theta * eps[2] +
                p * eps[1];
        y[kT] = beta * st.yp_prev + theta * eps[2];
        st.yp_prev = y[kP];
        l = y[kE] - y[kP] - y[kT];
        dp = y[kP];
        g = l;
    }
};

struct FullModel {
    ModelParams mp;
    StateHistory h;

    struct State {
        double ye = 0, yp = 0, yt = 0, dp_prev = 0;
    };

    Vec3 initial_levels() const { return Vec3{h.y_e0, h.y_p0, h.y_t0}; }

    void begin_path(State& st) const {
        st.ye = h.y_e0;
        st.yp = h.y_p0;
        st.yt = h.y_t0;
        st.dp_prev = h.physical_lag();
    }

    void advance(State& st, const std::array<double, 3>& eps, double y[3], double& l, double& dp,
                 double& g) const {
        const double d_e = mp.r + mp.e * eps[0];
        const double d_t = mp.beta * st.dp_prev + mp.theta * eps[2];
        // The physical increment appears on both sides of the cumulative
        // equation; solving it linearly reproduces the reduced system exactly.
        const double d_p = (st.dp_prev + mp.gamma_tilde * d_e -
                            (mp.gamma_tilde + mp.alpha_tilde) * d_t + mp.p_tilde * eps[1]) /
                           (1.0 + mp.gamma_tilde);
        st.ye += d_e;
        st.yp += d_p;
        st.yt += d_t;
        st.dp_prev = d_p;
        y[kE] = st.ye;
        y[kP] = st.yp;
        y[kT] = st.yt;
        l = st.ye - st.yp - st.yt;
        dp = d_p;
        g = d_e - d_p - d_t;
    }
};

unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    if (const char* env = std::getenv("CERM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1u;
}

std::vector<long long> resolve_snapshots(const SimConfig& cfg) {
    std::vector<long long> snaps = cfg.snapshots;
    if (snaps.empty()) snaps.push_back(cfg.horizon);
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
    for (long long t : snaps)
        if (t < 1 || t > cfg.horizon)
            throw ModelError("simulate: snapshot time " + std::to_string(t) +
                             " outside [1, horizon]");
    return snaps;
}

double binom_se(double p, double n) { return n > 0.0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / n) : 0.0; }

template <class Model>
PathEnsemble run_simulation(const Model& model, const SimConfig& cfg) {
    if (cfg.n_paths < 1) throw ModelError("simulate: n_paths must be >= 1");
    if (cfg.horizon < 1) throw ModelError("simulate: horizon must be >= 1");
    const std::vector<long long> snaps = resolve_snapshots(cfg);

    PathEnsemble ens;
    ens.config = cfg;
    ens.config.snapshots = snaps;

    std::vector<std::uint8_t> is_snap(static_cast<std::size_t>(cfg.horizon) + 1, 0);
    std::vector<int> snap_slot(static_cast<std::size_t>(cfg.horizon) + 1, -1);
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        is_snap[static_cast<std::size_t>(snaps[k])] = 1;
        snap_slot[static_cast<std::size_t>(snaps[k])] = static_cast<int>(k);
    }

    const std::uint64_t n_blocks = (cfg.n_paths + kBlockPaths - 1) / kBlockPaths;
    std::vector<std::vector<SnapAcc>> block_accs;
    std::vector<std::vector<std::vector<double>>> block_log_growth;
    std::vector<std::vector<std::vector<double>>> block_dyp;
    std::vector<std::vector<std::vector<double>>> block_g;
    try {
        block_accs.assign(n_blocks, std::vector<SnapAcc>(snaps.size()));
        if (cfg.collect_log_growth)
            block_log_growth.assign(n_blocks, std::vector<std::vector<double>>(snaps.size()));
        if (cfg.collect_increments) {
            block_dyp.assign(n_blocks, std::vector<std::vector<double>>(snaps.size()));
            block_g.assign(n_blocks, std::vector<std::vector<double>>(snaps.size()));
        }
        if (cfg.store_paths) {
            const std::uint64_t cells = cfg.n_paths * (static_cast<std::uint64_t>(cfg.horizon) + 1) * 3;
            ens.paths.assign(cells, 0.0);
        }
    } catch (const std::bad_alloc&) {
        throw DataError("simulate: ensemble storage exhausted; partial results discarded");
    }

    const auto run_block = [&](std::uint64_t block) {
        const std::uint64_t first = block * kBlockPaths;
        const std::uint64_t last = std::min(first + kBlockPaths, cfg.n_paths);
        auto& accs = block_accs[block];
        for (std::uint64_t path = first; path < last; ++path) {
            typename Model::State st;
            model.begin_path(st);
            double y[3];
            double y_prev[3];
            const Vec3 init = model.initial_levels();
            y_prev[0] = init[0];
            y_prev[1] = init[1];
            y_prev[2] = init[2];
            if (cfg.store_paths) {
                double* row = ens.paths.data() +
                              path * (static_cast<std::uint64_t>(cfg.horizon) + 1) * 3;
                row[0] = init[0];
                row[1] = init[1];
                row[2] = init[2];
            }
            for (long long t = 1; t <= cfg.horizon; ++t) {
                const auto eps = normal_triple(cfg.seed, path, static_cast<std::uint32_t>(t));
                double l, dp, g;
                model.advance(st, eps, y, l, dp, g);
                if (is_snap[static_cast<std::size_t>(t)]) {
                    const int slot = snap_slot[static_cast<std::size_t>(t)];
                    accs[static_cast<std::size_t>(slot)].add(y, y_prev, l, dp, g);
                    if (cfg.collect_log_growth)
                        block_log_growth[block][static_cast<std::size_t>(slot)].push_back(l);
                    if (cfg.collect_increments) {
                        block_dyp[block][static_cast<std::size_t>(slot)].push_back(dp);
                        block_g[block][static_cast<std::size_t>(slot)].push_back(g);
                    }
                }
                if (cfg.store_paths) {
                    double* row = ens.paths.data() +
                                  (path * (static_cast<std::uint64_t>(cfg.horizon) + 1) +
                                   static_cast<std::uint64_t>(t)) *
                                      3;
                    row[0] = y[0];
                    row[1] = y[1];
                    row[2] = y[2];
                }
                y_prev[0] = y[0];
                y_prev[1] = y[1];
                y_prev[2] = y[2];
            }
        }
    };

    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(cfg.threads), n_blocks));
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= n_blocks) return;
                    run_block(b);
                }
            });
        for (auto& th : pool) th.join();
    }

    // Deterministic merge in block order; statistics cannot depend on the
    // worker schedule.
    ens.stats.resize(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        SnapAcc total;
        for (std::uint64_t b = 0; b < n_blocks; ++b) total.merge(block_accs[b][k]);

        SnapshotStats& st = ens.stats[k];
        st.t = snaps[k];
        st.n = total.n;
        const double n = static_cast<double>(total.n);
        for (int i = 0; i < 3; ++i) st.mean[static_cast<std::size_t>(i)] = total.s1[i] / n;
        st.cov = total.covariance();
        for (int i = 0; i < 3; ++i)
            st.mean_se[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, st.cov(i, i)) / n);

        if (cfg.mode == SimMode::centered) {
            // Fourth-raw-moment standard errors; the factors are centered in
            // distribution so raw fourth moments estimate the central ones.
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    const double m4 = total.s4[kSymIdx[i][j]] / n;
                    const double v = std::sqrt(std::max(0.0, m4 - st.cov(i, j) * st.cov(i, j)) / n);
                    st.cov_se(i, j) = st.cov_se(j, i) = v;
                }
        } else {
            // Levels carry large means; use the spread of per-block estimates.
            std::uint64_t used = 0;
            Mat3 mean_est = Mat3::zero();
            for (std::uint64_t b = 0; b < n_blocks; ++b)
                if (block_accs[b][k].n >= 2) {
                    mean_est += block_accs[b][k].covariance();
                    ++used;
                }
            if (used >= 2) {
                for (auto& v : mean_est.m) v /= static_cast<double>(used);
                Mat3 spread = Mat3::zero();
                for (std::uint64_t b = 0; b < n_blocks; ++b)
                    if (block_accs[b][k].n >= 2) {
                        const Mat3 cb = block_accs[b][k].covariance();
                        for (int i = 0; i < 9; ++i)
                            spread.m[static_cast<std::size_t>(i)] +=
                                (cb.m[static_cast<std::size_t>(i)] - mean_est.m[static_cast<std::size_t>(i)]) *
                                (cb.m[static_cast<std::size_t>(i)] - mean_est.m[static_cast<std::size_t>(i)]);
                    }
                for (int i = 0; i < 9; ++i)
                    st.cov_se.m[static_cast<std::size_t>(i)] = std::sqrt(
                        spread.m[static_cast<std::size_t>(i)] /
                        (static_cast<double>(used - 1) * static_cast<double>(used)));
            }
        }

        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double raw = total.cross[3 * i + j] / n;
                const double lag = raw - st.mean[static_cast<std::size_t>(i)] *
                                             (total.s1_prev[j] / n);
                st.lag1_cov(i, j) = lag;
                const double m2 = total.cross2[3 * i + j] / n;
                st.lag1_cov_se(i, j) = std::sqrt(std::max(0.0, m2 - raw * raw) / n);
            }

        const double lm = total.l1 / n;
        const double l2c = std::max(0.0, total.l2 / n - lm * lm);
        const double l3c = total.l3 / n - 3.0 * lm * total.l2 / n + 2.0 * lm * lm * lm;
        const double l4c = total.l4 / n - 4.0 * lm * total.l3 / n +
                           6.0 * lm * lm * total.l2 / n - 3.0 * lm * lm * lm * lm;
        (void)l3c;
        st.growth_mean = lm;
        st.growth_var = total.n >= 2 ? l2c * n / (n - 1.0) : 0.0;
        st.growth_mean_se = std::sqrt(l2c / n);
        st.growth_var_se = std::sqrt(std::max(0.0, l4c - l2c * l2c) / n);

        st.increment_dyp_mean = total.dp1 / n;
        st.increment_g_mean = total.g1 / n;
        if (total.n >= 2) {
            st.increment_dyp_var =
                (total.dp2 - total.dp1 * total.dp1 / n) / (n - 1.0);
            st.increment_g_var = (total.g2 - total.g1 * total.g1 / n) / (n - 1.0);
            st.increment_dyp_g_cov = (total.dpg - total.dp1 * total.g1 / n) / (n - 1.0);
        }

        st.frac_dyp_neg = static_cast<double>(total.c_neg) / n;
        st.frac_dyp_neg_se = binom_se(st.frac_dyp_neg, n);
        st.frac_g_pos = static_cast<double>(total.c_pos) / n;
        st.frac_g_pos_se = binom_se(st.frac_g_pos, n);
        if (total.c_pos > 0) {
            st.frac_nz_given_g_pos =
                static_cast<double>(total.c_both) / static_cast<double>(total.c_pos);
            st.frac_nz_given_g_pos_se =
                binom_se(st.frac_nz_given_g_pos, static_cast<double>(total.c_pos));
        }

        if (cfg.collect_log_growth) {
            for (std::uint64_t b = 0; b < n_blocks; ++b) {
                auto& vals = block_log_growth[b][k];
                st.log_growth.insert(st.log_growth.end(), vals.begin(), vals.end());
                vals.clear();
            }
        }
        if (cfg.collect_increments) {
            for (std::uint64_t b = 0; b < n_blocks; ++b) {
                auto& dv = block_dyp[b][k];
                st.increment_dyp.insert(st.increment_dyp.end(), dv.begin(), dv.end());
                dv.clear();
                auto& gv = block_g[b][k];
                st.increment_g.insert(st.increment_g.end(), gv.begin(), gv.end());
                gv.clear();
            }
        }
    }
    return ens;
}

} // namespace

double PathEnsemble::value(std::uint64_t path, long long t, int factor) const {
    return paths.at((path * (static_cast<std::uint64_t>(config.horizon) + 1) +
                     static_cast<std::uint64_t>(t)) *
                        3 +
                    static_cast<std::uint64_t>(factor));
}

const SnapshotStats& PathEnsemble::stats_at(long long t) const {
    for (const auto& s : stats)
        if (s.t == t) return s;
    throw ModelError("ensemble has no snapshot at t = " + std::to_string(t));
}

PathEnsemble simulate_centered(const ReducedParams& rp, double e, double theta,
                               const SimConfig& config) {
    if (!(std::abs(rp.q) < 1.0)) throw ModelError("simulate_centered: |q| must be < 1");
    CenteredModel model{e, theta, rp.alpha, rp.gamma, rp.p, rp.q, rp.beta};
    return run_simulation(model, config);
}

PathEnsemble simulate_full(const ModelParams& params, const StateHistory& history,
                           const SimConfig& config) {
    reduce(params); // validates parameters and stationarity
    const auto rep = validate_history(history);
    if (!rep.ok()) throw ModelError("simulate_full: invalid history: " + rep.joined());
    FullModel model{params, history};
    return run_simulation(model, config);
}

EmpiricalMoments empirical_moments(const PathEnsemble& ensemble, long long t) {
    if (ensemble.config.n_paths < 2) throw ModelError("empirical_moments: need n_paths >= 2");
    if (t < 0 || t > ensemble.config.horizon)
        throw ModelError("empirical_moments: t outside the simulated horizon");

    EmpiricalMoments em;
    if (!ensemble.paths.empty()) {
        const std::uint64_t n = ensemble.config.n_paths;
        em.n = n;
        const double nn = static_cast<double>(n);
        for (std::uint64_t p = 0; p < n; ++p)
            for (int i = 0; i < 3; ++i)
                em.mean[static_cast<std::size_t>(i)] += ensemble.value(p, t, i);
        for (int i = 0; i < 3; ++i) em.mean[static_cast<std::size_t>(i)] /= nn;

        Mat3 m2 = Mat3::zero(), m4 = Mat3::zero();
        for (std::uint64_t p = 0; p < n; ++p) {
            double d[3];
            for (int i = 0; i < 3; ++i)
                d[i] = ensemble.value(p, t, i) - em.mean[static_cast<std::size_t>(i)];
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    const double prod = d[i] * d[j];
                    m2(i, j) += prod;
                    m4(i, j) += prod * prod;
                }
        }
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                em.cov(i, j) = em.cov(j, i) = m2(i, j) / (nn - 1.0);
                const double fourth = m4(i, j) / nn;
                em.cov_se(i, j) = em.cov_se(j, i) =
                    std::sqrt(std::max(0.0, fourth - em.cov(i, j) * em.cov(i, j)) / nn);
            }
        for (int i = 0; i < 3; ++i)
            em.mean_se[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, em.cov(i, i)) / nn);
        return em;
    }

    const SnapshotStats& s = ensemble.stats_at(t);
    em.n = s.n;
    em.mean = s.mean;
    em.mean_se = s.mean_se;
    em.cov = s.cov;
    em.cov_se = s.cov_se;
    return em;
}

void write_path_dump(const PathEnsemble& ensemble, const std::filesystem::path& path) {
    if (ensemble.paths.empty()) throw DataError("write_path_dump: ensemble has no stored paths");
    if (ensemble.config.n_paths > 0xFFFFFFFFull || ensemble.config.horizon > 0x7FFFFFFFll)
        throw DataError("write_path_dump: dimensions exceed the u32 header fields");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write path dump: " + path.string());
    const std::uint32_t header[4] = {kDumpMagic, kDumpVersion,
                                     static_cast<std::uint32_t>(ensemble.config.n_paths),
                                     static_cast<std::uint32_t>(ensemble.config.horizon)};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(ensemble.paths.data()),
              static_cast<std::streamsize>(ensemble.paths.size() * sizeof(double)));
    if (!out) throw DataError("short write on path dump: " + path.string());
}

PathEnsemble read_path_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open path dump: " + path.string());
    std::uint32_t header[4];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in || header[0] != kDumpMagic) throw DataError("path dump: bad magic");
    if (header[1] != kDumpVersion) throw DataError("path dump: unsupported version");
    PathEnsemble ens;
    ens.config.n_paths = header[2];
    ens.config.horizon = header[3];
    ens.config.store_paths = true;
    const std::uint64_t cells =
        ens.config.n_paths * (static_cast<std::uint64_t>(ens.config.horizon) + 1) * 3;
    ens.paths.resize(cells);
    in.read(reinterpret_cast<char*>(ens.paths.data()),
            static_cast<std::streamsize>(cells * sizeof(double)));
    if (!in) throw DataError("path dump truncated: " + path.string());
    return ens;
}

void write_ensemble_summary_csv(const PathEnsemble& ensemble, const std::filesystem::path& path,
                                const std::string& meta_comment) {
    CsvWriter w(path, meta_comment);
    w.header({"t",         "n",         "mean_E",    "mean_P",    "mean_T",    "se_mean_E",
              "se_mean_P", "se_mean_T", "cov_EE",    "cov_EP",    "cov_ET",    "cov_PP",
              "cov_PT",    "cov_TT",    "se_cov_EE", "se_cov_EP", "se_cov_ET", "se_cov_PP",
              "se_cov_PT", "se_cov_TT", "growth_mean", "growth_var", "frac_dyp_neg",
              "frac_g_pos", "frac_nz_given_g_pos"});
    for (const auto& s : ensemble.stats) {
        w.field(s.t);
        w.field(static_cast<long long>(s.n));
        for (int i = 0; i < 3; ++i) w.field(s.mean[static_cast<std::size_t>(i)]);
        for (int i = 0; i < 3; ++i) w.field(s.mean_se[static_cast<std::size_t>(i)]);
        const int pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
        for (const auto& pr : pairs) w.field(s.cov(pr[0], pr[1]));
        for (const auto& pr : pairs) w.field(s.cov_se(pr[0], pr[1]));
        w.field(s.growth_mean);
        w.field(s.growth_var);
        w.field(s.frac_dyp_neg);
        w.field(s.frac_g_pos);
        w.field(s.frac_nz_given_g_pos);
        w.end_row();
    }
}

} // namespace cerm
