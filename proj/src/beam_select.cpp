// SPDX-License-Identifier: Apache-2.0
//
// beamsel: analog beam selection toolkit for THz beamspace MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "beamsel/beam_select.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

namespace beamsel
{
    namespace
    {
        constexpr double rank_tolerance = 1e-10;

        double snr_linear(double snr_db)
        {
            if (!std::isfinite(snr_db))
                throw Error(ErrorKind::invalid_argument, "snr_db must be finite");
            return std::pow(10.0, snr_db / 10.0);
        }

        // log2 det of a Hermitian positive definite matrix via Cholesky; +inf pivots never occur here.
        double log2_det_hpd(const CMatrix &m)
        {
            Eigen::LLT<CMatrix> llt(m);
            if (llt.info() != Eigen::Success)
                throw Error(ErrorKind::invalid_selection, "matrix is not positive definite");
            double acc = 0.0;
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                acc += std::log2(llt.matrixL()(i, i).real());
            return 2.0 * acc;
        }

        // Calls visit(combo) for every k-subset of `items` in lexicographic order.
        template <typename Visit>
        void for_each_combination(const std::vector<std::size_t> &items, std::size_t k, Visit &&visit)
        {
            const std::size_t n = items.size();
            if (k > n)
                return;
            std::vector<std::size_t> idx(k);
            std::iota(idx.begin(), idx.end(), 0);
            std::vector<std::size_t> combo(k);
            while (true)
            {
                for (std::size_t i = 0; i < k; ++i)
                    combo[i] = items[idx[i]];
                visit(combo);
                std::size_t i = k;
                while (i > 0 && idx[i - 1] == n - k + i - 1)
                    --i;
                if (i == 0)
                    return;
                ++idx[i - 1];
                for (std::size_t j = i; j < k; ++j)
                    idx[j] = idx[j - 1] + 1;
            }
        }

        bool lex_less(const BeamSelection &a, const BeamSelection &b)
        {
            if (a.tx_beams != b.tx_beams)
                return a.tx_beams < b.tx_beams;
            return a.rx_beams < b.rx_beams;
        }

        struct Candidate
        {
            BeamSelection sel;
            double score = -1.0;
            bool valid = false;

            void offer(double s, const BeamSelection &cand)
            {
                if (!valid || s > score || (s == score && lex_less(cand, sel)))
                {
                    score = s;
                    sel = cand;
                    valid = true;
                }
            }
        };

        // Fast scoring with n_streams = min(n_rf_tx, n_rf_rx): the SVD stage then covers every
        // singular value, so SE = log2 det(I + c G) with G the Gram matrix on the smaller side.
        // `rows`/`cols` refer to `a`, with the Gram taken over the row side (|row combo| <= |col combo|).
        struct FastEnumerator
        {
            const CMatrix &a;
            const std::vector<std::size_t> &row_pool;
            const std::vector<std::size_t> &col_pool;
            std::size_t row_k;
            std::size_t col_k;
            double c;
            bool swapped; // a = h_b^H; rows are transmit beams

            Candidate best;

            void run()
            {
                const std::size_t k = row_k;
                std::vector<cplx> outer(col_pool.size() * k * k);
                std::vector<std::vector<cplx>> partial(col_k + 1, std::vector<cplx>(k * k, cplx{}));
                std::vector<std::size_t> col_combo(col_k);
                std::vector<cplx> work(k * k);

                for_each_combination(row_pool, row_k, [&](const std::vector<std::size_t> &row_combo) {
                    for (std::size_t ci = 0; ci < col_pool.size(); ++ci)
                    {
                        cplx *p = &outer[ci * k * k];
                        for (std::size_t i = 0; i < k; ++i)
                        {
                            const cplx hi = a(static_cast<Eigen::Index>(row_combo[i]), static_cast<Eigen::Index>(col_pool[ci]));
                            for (std::size_t j = 0; j < k; ++j)
                            {
                                const cplx hj = a(static_cast<Eigen::Index>(row_combo[j]), static_cast<Eigen::Index>(col_pool[ci]));
                                p[i * k + j] = hi * std::conj(hj);
                            }
                        }
                    }
                    descend(row_combo, 0, 0, col_combo, partial, outer, work);
                });
            }

            void descend(const std::vector<std::size_t> &row_combo, std::size_t depth, std::size_t start,
                         std::vector<std::size_t> &col_combo, std::vector<std::vector<cplx>> &partial,
                         const std::vector<cplx> &outer, std::vector<cplx> &work)
            {
                const std::size_t k = row_k;
                if (depth == col_k)
                {
                    score(row_combo, col_combo, partial[depth], work);
                    return;
                }
                const std::size_t remaining = col_k - depth;
                for (std::size_t ci = start; ci + remaining <= col_pool.size(); ++ci)
                {
                    col_combo[depth] = col_pool[ci];
                    const cplx *p = &outer[ci * k * k];
                    auto &dst = partial[depth + 1];
                    const auto &src = partial[depth];
                    for (std::size_t e = 0; e < k * k; ++e)
                        dst[e] = src[e] + p[e];
                    descend(row_combo, depth + 1, ci + 1, col_combo, partial, outer, work);
                }
            }

            void score(const std::vector<std::size_t> &row_combo, const std::vector<std::size_t> &col_combo,
                       const std::vector<cplx> &gram, std::vector<cplx> &l)
            {
                const std::size_t k = row_k;
                // Cholesky of I + c * gram (lower triangle), accumulating log det.
                double log_det = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j <= i; ++j)
                    {
                        cplx s = c * gram[i * k + j];
                        if (i == j)
                            s += 1.0;
                        for (std::size_t m = 0; m < j; ++m)
                            s -= l[i * k + m] * std::conj(l[j * k + m]);
                        if (i == j)
                        {
                            const double d = std::sqrt(std::max(s.real(), 1e-300));
                            l[i * k + i] = d;
                            log_det += std::log(d);
                        }
                        else
                            l[i * k + j] = s / l[j * k + j].real();
                    }
                const double se = 2.0 * log_det / std::log(2.0);
                BeamSelection cand;
                if (swapped)
                {
                    cand.tx_beams = row_combo;
                    cand.rx_beams = col_combo;
                }
                else
                {
                    cand.tx_beams = col_combo;
                    cand.rx_beams = row_combo;
                }
                best.offer(se, cand);
            }
        };
    }

    SelectionConfig SelectionConfig::resolved(std::size_t n_tx, std::size_t n_rx) const
    {
        SelectionConfig c = *this;
        if (c.n_rf_tx < 1 || c.n_rf_rx < 1)
            throw Error(ErrorKind::invalid_argument, "RF chain counts must be >= 1");
        if (c.n_rf_tx > n_tx || c.n_rf_rx > n_rx)
            throw Error(ErrorKind::invalid_argument, "more RF chains than beams");
        auto auto_pool = [](std::size_t n, std::size_t rf) { return n <= 16 ? n : std::min(n, 4 * rf); };
        if (c.candidate_pool_tx == 0)
            c.candidate_pool_tx = auto_pool(n_tx, c.n_rf_tx);
        if (c.candidate_pool_rx == 0)
            c.candidate_pool_rx = auto_pool(n_rx, c.n_rf_rx);
        if (c.candidate_pool_tx < c.n_rf_tx || c.candidate_pool_rx < c.n_rf_rx)
            throw Error(ErrorKind::invalid_argument, "candidate pool smaller than RF chain count");
        if (c.candidate_pool_tx > n_tx || c.candidate_pool_rx > n_rx)
            throw Error(ErrorKind::invalid_argument, "candidate pool larger than beam count");
        return c;
    }

    RMatrix BeamSelection::selection_matrix(const std::vector<std::size_t> &beams, std::size_t n)
    {
        RMatrix s = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(beams.size()));
        for (std::size_t c = 0; c < beams.size(); ++c)
        {
            if (beams[c] >= n)
                throw Error(ErrorKind::invalid_selection, "beam index out of range");
            s(static_cast<Eigen::Index>(beams[c]), static_cast<Eigen::Index>(c)) = 1.0;
        }
        return s;
    }

    CMatrix selected_channel(const CMatrix &h_b, const BeamSelection &sel)
    {
        CMatrix h(static_cast<Eigen::Index>(sel.rx_beams.size()), static_cast<Eigen::Index>(sel.tx_beams.size()));
        for (std::size_t i = 0; i < sel.rx_beams.size(); ++i)
            for (std::size_t j = 0; j < sel.tx_beams.size(); ++j)
            {
                if (sel.rx_beams[i] >= static_cast<std::size_t>(h_b.rows()) || sel.tx_beams[j] >= static_cast<std::size_t>(h_b.cols()))
                    throw Error(ErrorKind::invalid_selection, "beam index out of range");
                h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    h_b(static_cast<Eigen::Index>(sel.rx_beams[i]), static_cast<Eigen::Index>(sel.tx_beams[j]));
            }
        return h;
    }

    DigitalStage build_digital_stage(const CMatrix &h_sel, std::size_t n_streams)
    {
        const auto ns = static_cast<Eigen::Index>(n_streams);
        if (n_streams < 1 || ns > std::min(h_sel.rows(), h_sel.cols()))
            throw Error(ErrorKind::invalid_argument, "n_streams must be in [1, min(dims)]");
        Eigen::JacobiSVD<CMatrix> svd(h_sel, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto &s = svd.singularValues();
        if (s(0) <= 0.0 || s(ns - 1) <= rank_tolerance * s(0))
            throw Error(ErrorKind::degenerate_channel, "selected channel rank below n_streams");
        // Unit-norm columns already give ||S_t F||_F^2 = Ns with equal power per stream.
        return {svd.matrixV().leftCols(ns), svd.matrixU().leftCols(ns)};
    }

    double spectral_efficiency(const CMatrix &h_b, const BeamSelection &sel, const DigitalStage &dig, double snr_db)
    {
        const double rho = snr_linear(snr_db);
        const auto ns = dig.f_bb.cols();
        if (dig.w_bb.cols() != ns || dig.f_bb.rows() != static_cast<Eigen::Index>(sel.tx_beams.size()) ||
            dig.w_bb.rows() != static_cast<Eigen::Index>(sel.rx_beams.size()))
            throw Error(ErrorKind::invalid_argument, "spectral_efficiency: digital stage dims do not match selection");

        const RMatrix sr = sel.s_r(static_cast<std::size_t>(h_b.rows()));
        const RMatrix st = sel.s_t(static_cast<std::size_t>(h_b.cols()));
        const CMatrix srw = sr.cast<cplx>() * dig.w_bb;
        const CMatrix rn = srw.adjoint() * srw;
        Eigen::FullPivLU<CMatrix> rn_lu(rn);
        if (!rn_lu.isInvertible())
            throw Error(ErrorKind::invalid_selection, "noise covariance after combining is singular");

        const CMatrix eff = srw.adjoint() * h_b * st.cast<cplx>() * dig.f_bb; // Ns x Ns
        const CMatrix m = CMatrix::Identity(ns, ns) + (rho / static_cast<double>(ns)) * rn_lu.solve(eff * eff.adjoint());
        const double se = std::log2(std::abs(m.partialPivLu().determinant()));
        return std::max(se, 0.0);
    }

    double svd_spectral_efficiency(const CMatrix &h_sel, std::size_t n_streams, double snr_db)
    {
        const auto ns = static_cast<Eigen::Index>(n_streams);
        if (n_streams < 1 || ns > std::min(h_sel.rows(), h_sel.cols()))
            throw Error(ErrorKind::invalid_argument, "n_streams must be in [1, min(dims)]");
        const RVector s = Eigen::JacobiSVD<CMatrix>(h_sel).singularValues();
        const double c = snr_linear(snr_db) / static_cast<double>(n_streams);
        double se = 0.0;
        for (Eigen::Index i = 0; i < ns; ++i)
            se += std::log2(1.0 + c * s(i) * s(i));
        return se;
    }

    double spectral_efficiency_identity_noise(const CMatrix &h_b, const BeamSelection &sel, const DigitalStage &dig,
                                              double snr_db)
    {
        const double rho = snr_linear(snr_db);
        const auto ns = dig.f_bb.cols();
        const CMatrix h_eff = selected_channel(h_b, sel) * dig.f_bb;
        const CMatrix g = dig.w_bb.adjoint() * h_eff;
        const CMatrix m = CMatrix::Identity(ns, ns) + (rho / static_cast<double>(ns)) * g * g.adjoint();
        return std::max(log2_det_hpd(m), 0.0);
    }

    double frobenius_objective(const CMatrix &h_b, const BeamSelection &sel, const DigitalStage &dig)
    {
        const CMatrix sr = sel.s_r(static_cast<std::size_t>(h_b.rows())).cast<cplx>();
        const CMatrix st = sel.s_t(static_cast<std::size_t>(h_b.cols())).cast<cplx>();
        return (h_b - sr * dig.w_bb * dig.f_bb.adjoint() * st.adjoint()).squaredNorm();
    }

    RVector tx_beam_energy(const CMatrix &h_b) { return h_b.colwise().squaredNorm().transpose(); }

    RVector rx_beam_energy(const CMatrix &h_b) { return h_b.rowwise().squaredNorm(); }

    std::vector<std::size_t> top_energy_beams(const RVector &energy, std::size_t count)
    {
        std::vector<std::size_t> order(static_cast<std::size_t>(energy.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return energy(static_cast<Eigen::Index>(a)) > energy(static_cast<Eigen::Index>(b));
        });
        order.resize(std::min(count, order.size()));
        std::sort(order.begin(), order.end());
        return order;
    }

    std::vector<std::size_t> select_by_score(const RVector &score, const RVector &energy, std::size_t count)
    {
        std::vector<std::size_t> order(static_cast<std::size_t>(score.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            if (score(ia) != score(ib))
                return score(ia) > score(ib);
            return energy(ia) > energy(ib);
        });
        order.resize(std::min(count, order.size()));
        std::sort(order.begin(), order.end());
        return order;
    }

    std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
    {
        if (k > n)
            return 0;
        k = std::min(k, n - k);
        std::uint64_t r = 1;
        for (std::uint64_t i = 1; i <= k; ++i)
        {
            r = r * (n - k + i) / i;
        }
        return r;
    }

    OracleResult oracle_select(const CMatrix &h_b, const SelectionConfig &cfg_in, double snr_db, const DigitalBuilder &builder)
    {
        const auto n_tx = static_cast<std::size_t>(h_b.cols());
        const auto n_rx = static_cast<std::size_t>(h_b.rows());
        const SelectionConfig cfg = cfg_in.resolved(n_tx, n_rx);
        const double rho = snr_linear(snr_db);

        const std::uint64_t count = binomial(cfg.candidate_pool_tx, cfg.n_rf_tx) * binomial(cfg.candidate_pool_rx, cfg.n_rf_rx);
        if (count > cfg.enumeration_budget)
            throw Error(ErrorKind::budget_exceeded, "oracle would enumerate " + std::to_string(count) +
                                                        " combinations (budget " + std::to_string(cfg.enumeration_budget) + ")");

        const auto tx_pool = top_energy_beams(tx_beam_energy(h_b), cfg.candidate_pool_tx);
        const auto rx_pool = top_energy_beams(rx_beam_energy(h_b), cfg.candidate_pool_rx);
        const std::size_t ns = cfg.n_streams();
        const DigitalBuilder build = builder ? builder : DigitalBuilder(build_digital_stage);

        auto exhaustive = [&]() {
            Candidate best;
            for_each_combination(tx_pool, cfg.n_rf_tx, [&](const std::vector<std::size_t> &tx) {
                for_each_combination(rx_pool, cfg.n_rf_rx, [&](const std::vector<std::size_t> &rx) {
                    BeamSelection sel{tx, rx};
                    DigitalStage dig;
                    try
                    {
                        dig = build(selected_channel(h_b, sel), ns);
                    }
                    catch (const Error &e)
                    {
                        if (e.kind() == ErrorKind::degenerate_channel)
                            return;
                        throw;
                    }
                    best.offer(spectral_efficiency(h_b, sel, dig, snr_db), sel);
                });
            });
            return best;
        };

        OracleResult result;
        result.combinations = count;
        if (!builder)
        {
            const double c = rho / static_cast<double>(ns);
            const bool rows_are_rx = cfg.n_rf_rx <= cfg.n_rf_tx;
            const CMatrix adj = rows_are_rx ? CMatrix() : CMatrix(h_b.adjoint());
            const CMatrix &a = rows_are_rx ? h_b : adj;
            FastEnumerator fe{a,
                              rows_are_rx ? rx_pool : tx_pool,
                              rows_are_rx ? tx_pool : rx_pool,
                              rows_are_rx ? cfg.n_rf_rx : cfg.n_rf_tx,
                              rows_are_rx ? cfg.n_rf_tx : cfg.n_rf_rx,
                              c,
                              !rows_are_rx,
                              {}};
            fe.run();
            try
            {
                result.selection = fe.best.sel;
                result.stage = build(selected_channel(h_b, result.selection), ns);
                result.se = spectral_efficiency(h_b, result.selection, result.stage, snr_db);
                return result;
            }
            catch (const Error &e)
            {
                if (e.kind() != ErrorKind::degenerate_channel)
                    throw;
                // rank-deficient winner: fall through to the exact enumeration which skips such combinations
            }
        }

        const Candidate best = exhaustive();
        if (!best.valid)
            throw Error(ErrorKind::degenerate_channel, "no candidate selection supports n_streams");
        result.selection = best.sel;
        result.stage = build(selected_channel(h_b, best.sel), ns);
        result.se = spectral_efficiency(h_b, best.sel, result.stage, snr_db);
        return result;
    }

    BeamSelection greedy_energy_select(const CMatrix &h_b, const SelectionConfig &cfg_in)
    {
        const SelectionConfig cfg = cfg_in.resolved(static_cast<std::size_t>(h_b.cols()), static_cast<std::size_t>(h_b.rows()));
        return {top_energy_beams(tx_beam_energy(h_b), cfg.n_rf_tx), top_energy_beams(rx_beam_energy(h_b), cfg.n_rf_rx)};
    }

    double zf_benchmark(const CMatrix &h_b, double snr_db, std::size_t n_streams)
    {
        const double rho = snr_linear(snr_db);
        const auto ns = static_cast<Eigen::Index>(n_streams);
        if (n_streams < 1 || ns > std::min(h_b.rows(), h_b.cols()))
            throw Error(ErrorKind::invalid_argument, "zf_benchmark: n_streams must be in [1, min(dims)]");
        Eigen::JacobiSVD<CMatrix> svd(h_b, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto &s = svd.singularValues();
        if (s(0) <= 0.0 || s(ns - 1) <= rank_tolerance * s(0))
            throw Error(ErrorKind::degenerate_channel, "channel rank below n_streams");
        const CMatrix f = svd.matrixV().leftCols(ns);
        const CMatrix w = svd.matrixU().leftCols(ns);
        const CMatrix g = w.adjoint() * h_b * f;
        const CMatrix m = CMatrix::Identity(ns, ns) + (rho / static_cast<double>(ns)) * g * g.adjoint();
        return std::max(log2_det_hpd(m), 0.0);
    }

    namespace
    {
        std::string join_beams(const std::vector<std::size_t> &beams)
        {
            std::string s;
            for (std::size_t i = 0; i < beams.size(); ++i)
            {
                if (i)
                    s += ';';
                s += std::to_string(beams[i]);
            }
            return s;
        }
    }

    void write_selection_csv_header(std::ostream &out)
    {
        out << "realization_id,strategy,snr_db,n_streams,tx_beams,rx_beams,se_bits\n";
    }

    void write_selection_csv_row(std::ostream &out, const SelectionRecord &rec)
    {
        std::ostringstream row;
        row << rec.realization_id << ',' << rec.strategy << ',' << rec.snr_db << ',' << rec.n_streams << ','
            << join_beams(rec.selection.tx_beams) << ',' << join_beams(rec.selection.rx_beams) << ','
            << std::setprecision(17) << rec.se_bits << '\n';
        out << row.str();
    }

    nlohmann::json to_json(const SelectionConfig &cfg)
    {
        return {{"n_rf_tx", cfg.n_rf_tx},
                {"n_rf_rx", cfg.n_rf_rx},
                {"candidate_pool_tx", cfg.candidate_pool_tx},
                {"candidate_pool_rx", cfg.candidate_pool_rx},
                {"enumeration_budget", cfg.enumeration_budget}};
    }

    SelectionConfig selection_config_from_json(const nlohmann::json &j)
    {
        SelectionConfig c;
        c.n_rf_tx = j.value("n_rf_tx", c.n_rf_tx);
        c.n_rf_rx = j.value("n_rf_rx", c.n_rf_rx);
        c.candidate_pool_tx = j.value("candidate_pool_tx", c.candidate_pool_tx);
        c.candidate_pool_rx = j.value("candidate_pool_rx", c.candidate_pool_rx);
        c.enumeration_budget = j.value("enumeration_budget", c.enumeration_budget);
        return c;
    }
}
