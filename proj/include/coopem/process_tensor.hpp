// process_tensor.hpp — Uniform process tensors for a boson bath coupled to one emitter's excited-state occupation

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coopem/bath_models.hpp"
#include "coopem/errors.hpp"

namespace coopem::pt {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Index = Eigen::Index;

// Single-emitter Liouville pair a = mu + 2 nu (column stacking of the 2x2 block); s = excited occupation.
inline constexpr int kSPlus[4] = {0, 1, 0, 1};
inline constexpr int kSMinus[4] = {0, 0, 1, 1};
inline constexpr int kX[4] = {0, 1, -1, 0};
inline constexpr int kXValues[3] = {-1, 0, 1};

inline int x_slot(int a) { return kX[a] + 1; }

// exp(-chi (eta s+_a - eta* s-_a)): later site with x = chi, earlier site in pair a
inline cd coupling_factor(cd eta, int chi, int a) {
    if (chi == 0) return 1.0;
    return std::exp(-static_cast<double>(chi) * (eta * static_cast<double>(kSPlus[a]) - std::conj(eta) * static_cast<double>(kSMinus[a])));
}
inline cd onsite_factor(cd eta0, int a) { return coupling_factor(eta0, kX[a], a); }

struct BuildOptions {
    double svd_threshold = 1e-8;  // discard singular values below threshold * largest
    std::size_t max_bond = 256;
    double jump_prior = 0.75;     // per-step switching probability of the path prior; 0.75 = unweighted
};

struct ProcessTensor {
    double dt = 0.0;
    std::size_t n_steps = 0;   // horizon the tensor is certified for (uniform blocks repeat beyond memory)
    std::size_t memory = 0;    // kernel depth K
    double svd_threshold = 0.0;
    std::size_t max_bond = 0;
    double jump_prior = 0.75;
    std::uint64_t sd_hash = 0;
    std::array<Mat, 4> Q;      // Q[a]: D x D, maps bond at step l-1 to step l
    Vec r0;                    // bond vector before the first step
    Vec q;                     // closure
    std::vector<std::size_t> build_bonds;

    static ProcessTensor trivial(double dt, std::size_t n_steps) {
        ProcessTensor p;
        p.dt = dt;
        p.n_steps = n_steps;
        for (auto& m : p.Q) m = Mat::Ones(1, 1);
        p.r0 = Vec::Ones(1);
        p.q = Vec::Ones(1);
        return p;
    }

    Index bond() const { return q.size(); }

    // Block at step l (1-based): the first one absorbs r0
    std::array<Mat, 4> block(std::size_t l) const {
        if (l <= 1) {
            std::array<Mat, 4> b;
            for (int a = 0; a < 4; ++a) b[a] = Q[a] * r0;
            return b;
        }
        return Q;
    }
    Vec closure(std::size_t /*l*/) const { return q; }

    std::vector<std::size_t> bond_dims() const {
        std::vector<std::size_t> d(n_steps + 1, static_cast<std::size_t>(bond()));
        d[0] = 1;
        return d;
    }

    bool is_trivial(double tol = 1e-12) const {
        if (bond() != 1) return false;
        for (const auto& m : Q)
            if (std::abs(m(0, 0) - 1.0) > tol) return false;
        return std::abs(q(0) * r0(0) - 1.0) <= tol;
    }
};

// Weight of an explicit path a_1..a_n
inline cd evaluate_path(const ProcessTensor& p, const std::vector<int>& path) {
    Vec v = p.r0;
    for (int a : path) v = p.Q[a] * v;
    return (p.q.transpose() * v)(0);
}

// All 4^n path weights, path index = sum a_k 4^(k-1)
inline std::vector<cd> contract_paths(const ProcessTensor& p, std::size_t n) {
    std::vector<Vec> layer{p.r0};
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<Vec> next(layer.size() * 4);
        for (int a = 0; a < 4; ++a)
            for (std::size_t i = 0; i < layer.size(); ++i) next[i + layer.size() * a] = p.Q[a] * layer[i];
        layer.swap(next);
    }
    std::vector<cd> out(layer.size());
    for (std::size_t i = 0; i < layer.size(); ++i) out[i] = (p.q.transpose() * layer[i])(0);
    return out;
}

namespace detail {

struct Site {
    std::array<Mat, 4> m;
    Index rows() const { return m[0].rows(); }
    Index cols() const { return m[0].cols(); }
};
using Chain = std::vector<Site>;

struct Prior {
    double p = 0.75;
    double stay() const { return 1.0 - p; }
    double move() const { return p / 3.0; }
    double sqrt_trans(int from, int to) const { return std::sqrt(from == to ? stay() : move()); }
    // omega(gg..g) over n sites with uniform start
    double constant_weight(std::size_t n) const { return 0.25 * std::pow(stay(), static_cast<double>(n) - 1.0); }
};

// sqrt Markov weights over n sites; open right bond carries the last value unless closed
inline Site prior_site(const Prior& pr, bool first, bool close) {
    Site s;
    const Index l = first ? 1 : 4, r = close ? 1 : 4;
    for (int a = 0; a < 4; ++a) {
        s.m[a] = Mat::Zero(l, r);
        for (Index i = 0; i < l; ++i) {
            const double w = first ? 0.5 : pr.sqrt_trans(static_cast<int>(i), a);
            s.m[a](i, close ? 0 : a) = w;
        }
    }
    return s;
}

inline Mat vstack(const Site& s) {
    const Index l = s.rows(), r = s.cols();
    Mat M(4 * l, r);
    for (int a = 0; a < 4; ++a) M.block(a * l, 0, l, r) = s.m[a];
    return M;
}
inline Mat hstack(const Site& s) {
    const Index l = s.rows(), r = s.cols();
    Mat M(l, 4 * r);
    for (int a = 0; a < 4; ++a) M.block(0, a * r, l, r) = s.m[a];
    return M;
}

// Right-canonicalize site k, pushing the remainder into k-1
inline void qr_left_push(Chain& c, std::size_t k) {
    const Mat M = hstack(c[k]);
    const Index l = M.rows(), r4 = M.cols(), r = r4 / 4;
    Eigen::HouseholderQR<Mat> qr(M.adjoint());
    const Index k2 = std::min(l, r4);
    const Mat Qm = qr.householderQ() * Mat::Identity(r4, k2);
    const Mat R = qr.matrixQR().topRows(k2).template triangularView<Eigen::Upper>();
    const Mat Qa = Qm.adjoint();
    for (int a = 0; a < 4; ++a) c[k].m[a] = Qa.block(0, a * r, k2, r);
    const Mat Rd = R.adjoint();
    for (int a = 0; a < 4; ++a) c[k - 1].m[a] = (c[k - 1].m[a] * Rd).eval();
}

inline Index keep_count(const Eigen::VectorXd& s, double thr) {
    if (s.size() == 0 || s(0) == 0.0) return 1;
    Index k = 0;
    while (k < s.size() && s(k) >= thr * s(0)) ++k;
    return std::max<Index>(k, 1);
}

// Left-canonicalize site k with truncation, pushing S V^dag into k+1
inline void svd_right_push(Chain& c, std::size_t k, double thr, std::size_t max_bond) {
    const Mat M = vstack(c[k]);
    const Index l = c[k].rows();
    Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index keep = keep_count(svd.singularValues(), thr);
    if (static_cast<std::size_t>(keep) > max_bond)
        throw BondOverflow("build_pt: bond " + std::to_string(keep) + " exceeds max_bond " + std::to_string(max_bond));
    const Mat U = svd.matrixU().leftCols(keep);
    for (int a = 0; a < 4; ++a) c[k].m[a] = U.block(a * l, 0, l, keep);
    const Mat SV = svd.singularValues().head(keep).asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
    for (int a = 0; a < 4; ++a) c[k + 1].m[a] = (SV * c[k + 1].m[a]).eval();
}

inline void left_qr(Chain& c, std::size_t k) {
    const Mat M = vstack(c[k]);
    const Index l = c[k].rows(), r = M.cols();
    Eigen::HouseholderQR<Mat> qr(M);
    const Index k2 = std::min(M.rows(), r);
    const Mat Qm = qr.householderQ() * Mat::Identity(M.rows(), k2);
    const Mat R = qr.matrixQR().topRows(k2).template triangularView<Eigen::Upper>();
    for (int a = 0; a < 4; ++a) c[k].m[a] = Qm.block(a * l, 0, l, k2);
    for (int a = 0; a < 4; ++a) c[k + 1].m[a] = (R * c[k + 1].m[a]).eval();
}

// Absorb the couplings of future site i (1-based) into the chain [past K | future 1..i]
inline void absorb_future(Chain& c, const std::vector<cd>& eta, std::size_t K, std::size_t i) {
    const std::size_t n = c.size();
    const std::size_t lo = i - 1;  // past site p_i
    {
        Site& s = c[n - 1];
        const Index l = s.rows(), r = s.cols();
        for (int a = 0; a < 4; ++a) {
            Mat nm = Mat::Zero(3 * l, r);
            nm.block(x_slot(a) * l, 0, l, r) = s.m[a];
            s.m[a] = std::move(nm);
        }
    }
    for (std::size_t k = n - 1; k-- > lo;) {
        Site& s = c[k];
        const Index l = s.rows(), r = s.cols();
        const bool past = k < K;
        const std::size_t lag = past ? K - k - 1 + i : 0;
        for (int a = 0; a < 4; ++a) {
            Mat nm = Mat::Zero(k > lo ? 3 * l : l, 3 * r);
            for (int cslot = 0; cslot < 3; ++cslot) {
                const cd f = past ? coupling_factor(eta[lag], kXValues[cslot], a) : cd(1.0);
                if (k > lo)
                    nm.block(cslot * l, cslot * r, l, r) = f * s.m[a];
                else
                    nm.block(0, cslot * r, l, r) = f * s.m[a];
            }
            s.m[a] = std::move(nm);
        }
    }
}

}  // namespace detail

// Translation-invariant process tensor from the past/future Schmidt decomposition of the memory window
inline ProcessTensor build_pt(const bath::MemoryKernel& kernel, std::size_t n_steps, const BuildOptions& opt = {}) {
    using namespace detail;
    if (n_steps < 1) throw InvalidArgument("build_pt: n_steps must be >= 1");
    if (!(opt.jump_prior > 0.0 && opt.jump_prior < 1.0)) throw InvalidArgument("build_pt: jump_prior must be in (0,1)");
    ProcessTensor pt;
    pt.dt = kernel.dt;
    pt.n_steps = n_steps;
    pt.svd_threshold = opt.svd_threshold;
    pt.max_bond = opt.max_bond;
    pt.jump_prior = opt.jump_prior;
    pt.sd_hash = kernel.sd_hash;

    const std::size_t K = std::max<std::size_t>(1, std::min(kernel.n_steps, n_steps));
    pt.memory = K;
    std::vector<cd> eta(K + 1, cd(0.0));
    for (std::size_t d = 0; d <= K && d < kernel.eta.size(); ++d) eta[d] = kernel.eta[d];

    const Prior pr{opt.jump_prior};
    Chain c;
    c.reserve(2 * K);
    for (std::size_t j = 0; j < K; ++j) c.push_back(prior_site(pr, j == 0, j == K - 1));
    for (std::size_t j = 0; j + 1 < K; ++j) left_qr(c, j);

    for (std::size_t i = 1; i <= K; ++i) {
        c.push_back(prior_site(pr, i == 1, i == K));
        absorb_future(c, eta, K, i);
        const std::size_t n = c.size();
        for (std::size_t k = n - 1; k >= i; --k) qr_left_push(c, k);
        for (std::size_t k = i - 1; k + 1 < n; ++k) svd_right_push(c, k, opt.svd_threshold, opt.max_bond);
    }

    // Mixed canonical form at the past/future cut
    for (std::size_t k = 2 * K - 1; k > K; --k) qr_left_push(c, k);
    const Mat M = hstack(c[K]);
    Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index D = keep_count(svd.singularValues(), opt.svd_threshold);
    if (static_cast<std::size_t>(D) > opt.max_bond)
        throw BondOverflow("build_pt: bond " + std::to_string(D) + " exceeds max_bond " + std::to_string(opt.max_bond));
    const Eigen::VectorXd s = svd.singularValues().head(D);
    const Mat Uc = svd.matrixU().leftCols(D);
    const Mat Vh = svd.matrixV().leftCols(D).adjoint();
    const Index r = c[K].cols();
    for (int a = 0; a < 4; ++a) c[K].m[a] = Vh.block(0, a * r, D, r);
    for (int a = 0; a < 4; ++a) c[K - 1].m[a] = (c[K - 1].m[a] * Uc).eval();

    for (const auto& site : c) pt.build_bonds.push_back(static_cast<std::size_t>(site.cols()));

    // r0 = U(g..g)/omega^(1/2), q = s V(g..g)/lambda^(1/2)
    Mat v = Mat::Ones(1, 1);
    for (std::size_t k = 0; k < K; ++k) v = v * c[k].m[0];
    const double wg = std::sqrt(pr.constant_weight(K));
    Vec r0 = v.row(0).transpose() / wg;
    Mat w = Mat::Ones(1, 1);
    for (std::size_t k = 2 * K; k-- > K;) w = c[k].m[0] * w;
    Vec q = s.cast<cd>().cwiseProduct(w.col(0)) / wg;

    // Q[a]_{d'd} = sum_t U(shift(t,a), d') f(a;t) U*(t,d) omega^(1/2)(t)/omega^(1/2)(shift(t,a))
    for (int a = 0; a < 4; ++a) {
        const int chi = kX[a];
        auto wsite = [&](std::size_t j, int p) {  // j: 1-based past position
            cd f = coupling_factor(eta[K - j + 1], chi, p);
            if (j == K && K >= 2) f /= pr.sqrt_trans(p, a);
            return f;
        };
        Mat Qa;
        if (K == 1) {
            Qa = Mat::Zero(D, D);
            for (int p = 0; p < 4; ++p) Qa += wsite(1, p) * c[0].m[a].transpose() * c[0].m[p].conjugate();
        } else {
            // E1[p1]: conj(U_1[p1]) row weighted; then fold p1 into site 2 with the transition factor
            std::array<Vec, 4> E1;
            for (int p = 0; p < 4; ++p) E1[p] = wsite(1, p) * c[0].m[p].row(0).adjoint();
            Mat E = Mat::Zero(c[1].cols(), c[0].cols());
            for (int p2 = 0; p2 < 4; ++p2) {
                Vec acc = Vec::Zero(c[0].cols());
                for (int p1 = 0; p1 < 4; ++p1) acc += pr.sqrt_trans(p1, p2) * E1[p1];
                E += wsite(2, p2) * c[1].m[p2].adjoint() * acc * c[0].m[p2];
            }
            for (std::size_t j = 3; j <= K; ++j) {
                Mat En = Mat::Zero(c[j - 1].cols(), c[j - 2].cols());
                for (int p = 0; p < 4; ++p) En += wsite(j, p) * c[j - 1].m[p].adjoint() * E * c[j - 2].m[p];
                E.swap(En);
            }
            Qa = (E * c[K - 1].m[a]).transpose();
        }
        pt.Q[a] = onsite_factor(eta[0], a) * Qa;
    }

    // scalar gauge: unit-norm r0 with real positive leading entry
    Index imax = 0;
    r0.cwiseAbs().maxCoeff(&imax);
    const cd z = r0.norm() * r0(imax) / std::abs(r0(imax));
    pt.r0 = r0 / z;
    pt.q = q * z;
    return pt;
}

inline ProcessTensor build_pt(const bath::MemoryKernel& kernel, std::size_t n_steps, double svd_threshold,
                              std::size_t max_bond) {
    BuildOptions o;
    o.svd_threshold = svd_threshold;
    o.max_bond = max_bond;
    return build_pt(kernel, n_steps, o);
}

// Binary format: "CPEMPT" magic, version, header, D, then Q blocks, r0, q (column-major complex doubles)
namespace cache {

inline constexpr char kPtMagic[8] = {'C', 'P', 'E', 'M', 'P', 'T', '\0', '\0'};
inline constexpr std::uint32_t kPtVersion = 1;

struct PtHeader {
    double dt = 0.0;
    std::uint64_t n_steps = 0;
    std::uint64_t memory = 0;
    double svd_threshold = 0.0;
    std::uint64_t max_bond = 0;
    double jump_prior = 0.0;
    std::uint64_t sd_hash = 0;

    bool operator==(const PtHeader&) const = default;
};

inline PtHeader header_of(const ProcessTensor& p) {
    return {p.dt, p.n_steps, p.memory, p.svd_threshold, p.max_bond, p.jump_prior, p.sd_hash};
}

inline std::string pt_key(const PtHeader& h) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "pt_%016llx_dt%.6g_K%llu_thr%.3g_mb%llu_jp%.3g.bin",
                  static_cast<unsigned long long>(h.sd_hash), h.dt, static_cast<unsigned long long>(h.memory),
                  h.svd_threshold, static_cast<unsigned long long>(h.max_bond), h.jump_prior);
    return buf;
}

inline void save_pt(const ProcessTensor& p, const std::filesystem::path& file) {
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw CacheError("cannot write " + tmp);
        const PtHeader h = header_of(p);
        const std::uint64_t D = static_cast<std::uint64_t>(p.bond());
        const std::uint64_t nb = p.build_bonds.size();
        os.write(kPtMagic, 8);
        os.write(reinterpret_cast<const char*>(&kPtVersion), sizeof kPtVersion);
        os.write(reinterpret_cast<const char*>(&h), sizeof h);
        os.write(reinterpret_cast<const char*>(&D), sizeof D);
        os.write(reinterpret_cast<const char*>(&nb), sizeof nb);
        for (auto b : p.build_bonds) {
            const std::uint64_t bb = b;
            os.write(reinterpret_cast<const char*>(&bb), sizeof bb);
        }
        for (const auto& m : p.Q) os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(D * D * sizeof(cd)));
        os.write(reinterpret_cast<const char*>(p.r0.data()), static_cast<std::streamsize>(D * sizeof(cd)));
        os.write(reinterpret_cast<const char*>(p.q.data()), static_cast<std::streamsize>(D * sizeof(cd)));
    }
    std::filesystem::rename(tmp, file);
}

// false on missing file or any header mismatch
inline bool load_pt(const std::filesystem::path& file, const PtHeader& expect, ProcessTensor& out) {
    std::ifstream is(file, std::ios::binary);
    if (!is) return false;
    char magic[8];
    std::uint32_t version = 0;
    PtHeader h;
    std::uint64_t D = 0, nb = 0;
    is.read(magic, 8);
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    is.read(reinterpret_cast<char*>(&h), sizeof h);
    is.read(reinterpret_cast<char*>(&D), sizeof D);
    is.read(reinterpret_cast<char*>(&nb), sizeof nb);
    if (!is || std::memcmp(magic, kPtMagic, 8) != 0 || version != kPtVersion || !(h == expect)) return false;
    if (D == 0 || D > 100000 || nb > 1000000) return false;
    ProcessTensor p;
    p.dt = h.dt;
    p.n_steps = h.n_steps;
    p.memory = h.memory;
    p.svd_threshold = h.svd_threshold;
    p.max_bond = h.max_bond;
    p.jump_prior = h.jump_prior;
    p.sd_hash = h.sd_hash;
    p.build_bonds.resize(nb);
    for (auto& b : p.build_bonds) {
        std::uint64_t bb = 0;
        is.read(reinterpret_cast<char*>(&bb), sizeof bb);
        b = bb;
    }
    const Index d = static_cast<Index>(D);
    for (auto& m : p.Q) {
        m.resize(d, d);
        is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(D * D * sizeof(cd)));
    }
    p.r0.resize(d);
    p.q.resize(d);
    is.read(reinterpret_cast<char*>(p.r0.data()), static_cast<std::streamsize>(D * sizeof(cd)));
    is.read(reinterpret_cast<char*>(p.q.data()), static_cast<std::streamsize>(D * sizeof(cd)));
    if (!is) return false;
    out = std::move(p);
    return true;
}

}  // namespace cache

}  // namespace coopem::pt
