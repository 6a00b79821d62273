// dynamics.hpp — Extended-state propagation with per-emitter process tensors, steady states, g2(tau), c(t)

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "coopem/bath_models.hpp"
#include "coopem/errors.hpp"
#include "coopem/process_tensor.hpp"
#include "coopem/quantum_core.hpp"

namespace coopem::dyn {

using cd = std::complex<double>;
using core::Mat2;
using core::Mat4;
using core::Mat16;
using core::Vec16;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Index = Eigen::Index;
using PtPtr = std::shared_ptr<const pt::ProcessTensor>;

enum class Geometry { MeasurementInduced, Superradiant };
enum class EngineKind { Auto, Joint, Product };
enum class SettleKind { Auto, Propagate, Krylov };

inline const char* to_string(Geometry g) { return g == Geometry::MeasurementInduced ? "MeasurementInduced" : "Superradiant"; }

struct Grids {
    double dt = 0.1;                   // ps
    double t_settle = 0.0;             // ps; 0 selects 20 max(1/gamma, 1/gamma_p)
    double tau_max = 6000.0;           // ps
    double tau_fine = 20.0;            // ps; every step recorded up to here
    std::size_t fine_stride = 1;
    std::size_t coarse_points = 400;   // geometric points on (tau_fine, tau_max]
    double max_spacing = 0.0;          // ps; caps the coarse spacing (to within dt) when > 0
    std::vector<double> tau_explicit;  // overrides the composite grid when non-empty
};

struct Numerics {
    double t_mem = 5.0;                // ps
    double kernel_tail_tol = 1e-9;     // depth trimmed while the dropped sum of |eta| stays below this
    double svd_threshold = 1e-8;
    std::size_t max_bond = 256;
    double jump_prior = 0.01;
    bool richardson = false;           // report 2 f(dt/2) - f(dt)
    EngineKind engine = EngineKind::Auto;
    SettleKind settle = SettleKind::Auto;
    double stationarity_tol = 1e-9;
    std::string cache_dir;             // empty: no cache
};

struct Scenario {
    core::LindbladSpec lindblad;
    std::optional<bath::SpectralDensity> phonons;
    double ppd_extra = 0.0;  // ps^-1, added to gamma_d in the Markovian part only
    Geometry geometry = Geometry::MeasurementInduced;
    Grids grids;
    Numerics numerics;
    core::DetectionModel detection;

    core::LindbladSpec markov_spec() const {
        core::LindbladSpec s = lindblad;
        s.gamma_d += ppd_extra;
        return s;
    }

    void validate() const {
        lindblad.validate();
        if (!(ppd_extra >= 0.0)) throw InvalidArgument("ppd_extra must be non-negative");
        const bool sr = lindblad.decay_mode == core::DecayMode::Superradiant;
        if ((geometry == Geometry::Superradiant) != sr)
            throw InvalidArgument("geometry and decay mode disagree");
        if (!(grids.dt > 0.0)) throw InvalidArgument("dt must be positive");
        if (!(grids.tau_max >= 0.0) || !(grids.tau_fine >= 0.0)) throw InvalidArgument("tau grid must be non-negative");
        if (grids.fine_stride == 0) throw InvalidArgument("fine_stride must be >= 1");
        if (phonons) {
            if (!(numerics.t_mem >= grids.dt)) throw InvalidArgument("t_mem must be >= dt");
            if (!(numerics.jump_prior > 0.0 && numerics.jump_prior < 1.0)) throw InvalidArgument("jump_prior must be in (0,1)");
            if (numerics.max_bond == 0) throw InvalidArgument("max_bond must be >= 1");
        }
    }
};

struct CurveNumerics {
    double dt = 0.0;
    bool richardson = false;
    std::string engine;
    std::string settle;
    std::size_t memory = 0;
    double t_mem = 0.0;
    double kernel_truncation = 0.0;
    double svd_threshold = 0.0;
    std::size_t max_bond = 0;
    double jump_prior = 0.0;
    std::size_t bond = 1;
    std::size_t build_bond_max = 1;
    double settle_time = 0.0;
    double stationarity_residual = 0.0;
    double trace_drift = 0.0;
};

struct G2Curve {
    std::vector<double> tau;  // ps
    std::vector<double> g2;
    double I0 = 0.0;
    Scenario scenario;
    CurveNumerics numerics;
};

struct CoherenceTrajectory {
    std::vector<double> t;  // ps
    std::vector<cd> c;
    Scenario scenario;
    CurveNumerics numerics;
};

// I0 = Tr[sD+ sD- rho]; the default detector is the symmetric mode
inline double intensity(const core::DensityMatrix& rho, const core::DetectionModel& det = {}) {
    const Mat4 A = det.lowering().matrix;
    return (A.adjoint() * A * rho.matrix).trace().real();
}

inline double g2_zero(const core::DensityMatrix& rho_ss, const core::DetectionModel& det = {}) {
    const double I0 = intensity(rho_ss, det);
    if (!(I0 > 1e-300)) throw ZeroIntensity("g2_zero: intensity vanishes");
    return rho_ss.n_ee() / (I0 * I0);
}

namespace detail {

// A = sum_k w_k first_k (x) second_k
struct OperatorSchmidt {
    std::vector<cd> weight;
    std::vector<Mat2> first, second;
};

inline OperatorSchmidt operator_schmidt(const Mat4& A, double rel_tol = 1e-13) {
    Mat4 T;
    for (int a1 = 0; a1 < 2; ++a1)
        for (int b1 = 0; b1 < 2; ++b1)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int b2 = 0; b2 < 2; ++b2) T(a1 + 2 * b1, a2 + 2 * b2) = A(2 * a1 + a2, 2 * b1 + b2);
    Eigen::JacobiSVD<Mat4> svd(T, Eigen::ComputeFullU | Eigen::ComputeFullV);
    OperatorSchmidt out;
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return out;
    for (int k = 0; k < 4; ++k) {
        if (s(k) <= rel_tol * s(0)) break;
        const core::Vec4 u = svd.matrixU().col(k);
        const core::Vec4 v = svd.matrixV().col(k).conjugate();
        out.weight.push_back(s(k));
        out.first.push_back(Eigen::Map<const Mat2>(u.data()));
        out.second.push_back(Eigen::Map<const Mat2>(v.data()));
    }
    return out;
}

// rho -> A rho B on one emitter's column-stacked block
inline Mat4 sandwich2(const Mat2& A, const Mat2& B) { return Eigen::kroneckerProduct(Mat2(B.transpose()), A).eval(); }

inline core::Vec4 vec2(const Mat2& m) { return Eigen::Map<const core::Vec4>(m.data()); }

// two-emitter vec index v = i + 4 j  ->  single-emitter pairs
inline constexpr std::array<int, 16> kAlpha1 = [] {
    std::array<int, 16> a{};
    for (int v = 0; v < 16; ++v) a[v] = (v % 4) / 2 + 2 * ((v / 4) / 2);
    return a;
}();
inline constexpr std::array<int, 16> kAlpha2 = [] {
    std::array<int, 16> a{};
    for (int v = 0; v < 16; ++v) a[v] = (v % 4) % 2 + 2 * ((v / 4) % 2);
    return a;
}();

}  // namespace detail

// R: (D1 D2) x 16, column v holds vec of the D1 x D2 bond matrix for Liouville component v
struct ExtendedState {
    Mat R;
    Index D1 = 1, D2 = 1;
    double time = 0.0;
};

// General engine: collective Markovian part, two process tensors contracted on each emitter's sub-index
class JointEngine {
public:
    static constexpr const char* kName = "joint";

    JointEngine(const core::Superoperator& M, double dt, PtPtr p1, PtPtr p2)
        : MT_(M.matrix.transpose()), dt_(dt), p_{std::move(p1), std::move(p2)} {
        for (const auto& p : p_)
            if (!p) throw InvalidArgument("JointEngine: null process tensor");
        for (const auto& p : p_)
            if (std::abs(p->dt - dt) > 1e-12 * dt) throw GridMismatch("JointEngine: process tensor dt differs from step");
        trivial_ = p_[0]->is_trivial() && p_[1]->is_trivial();
        s_.D1 = p_[0]->bond();
        s_.D2 = p_[1]->bond();
        qq_ = Eigen::kroneckerProduct(p_[1]->q, p_[0]->q).eval();
    }

    void init(const core::DensityMatrix& rho0) {
        const Vec16 v = rho0.vec();
        const Vec rr = Eigen::kroneckerProduct(p_[1]->r0, p_[0]->r0).eval();
        s_.R.resize(s_.D1 * s_.D2, 16);
        for (int k = 0; k < 16; ++k) s_.R.col(k) = v(k) * rr;
        s_.time = rho0.time;
        steps_ = 0;
    }

    void step() {
        s_.R = (s_.R * MT_).eval();
        if (!trivial_) {
            const Index D1 = s_.D1, D2 = s_.D2;
            Mat tmp(D1, D2);
            for (int v = 0; v < 16; ++v) {
                Eigen::Map<Mat> X(s_.R.col(v).data(), D1, D2);
                tmp.noalias() = p_[0]->Q[detail::kAlpha1[v]] * X;
                X.noalias() = tmp * p_[1]->Q[detail::kAlpha2[v]].transpose();
            }
        }
        ++steps_;
        s_.time += dt_;
    }

    core::DensityMatrix reduced() const {
        const Vec16 v = s_.R.transpose() * qq_;
        return core::DensityMatrix::from_vec(v, s_.time, false);
    }

    // rho -> L rho R^dag
    void insert(const Mat4& L, const Mat4& Rop) { s_.R = (s_.R * core::sandwich(L, Rop.adjoint()).transpose()).eval(); }
    void scale(cd z) { s_.R *= z; }

    Eigen::VectorXd bond_weights() const { return s_.R.rowwise().squaredNorm(); }
    Vec flat() const { return Eigen::Map<const Vec>(s_.R.data(), s_.R.size()); }
    void set_flat(const Vec& x) { s_.R = Eigen::Map<const Mat>(x.data(), s_.R.rows(), 16); }

    std::size_t steps() const { return steps_; }
    double time() const { return s_.time; }
    const ExtendedState& state() const { return s_; }
    ExtendedState& state() { return s_; }
    bool trivial() const { return trivial_; }

private:
    Mat16 MT_;
    double dt_;
    std::array<PtPtr, 2> p_;
    bool trivial_ = false;
    ExtendedState s_;
    Vec qq_;
    std::size_t steps_ = 0;
};

// Independent decay: the state is a short sum of per-emitter products, each factor D x 4
class ProductEngine {
public:
    static constexpr const char* kName = "product";

    ProductEngine(const core::LindbladSpec& spec, double dt, PtPtr p1, PtPtr p2)
        : dt_(dt), p_{std::move(p1), std::move(p2)} {
        for (const auto& p : p_)
            if (!p) throw InvalidArgument("ProductEngine: null process tensor");
        for (const auto& p : p_)
            if (std::abs(p->dt - dt) > 1e-12 * dt) throw GridMismatch("ProductEngine: process tensor dt differs from step");
        const Mat4 L1 = core::single_emitter_generator(spec);
        M1T_ = Mat4((L1 * dt).exp()).transpose();
        for (int i = 0; i < 2; ++i) trivial_[i] = p_[i]->is_trivial();
    }

    void init(const core::DensityMatrix& rho0) {
        terms_.clear();
        const auto sch = detail::operator_schmidt(rho0.matrix);
        for (std::size_t k = 0; k < sch.weight.size(); ++k) {
            Term t;
            t.c = sch.weight[k];
            t.R[0] = p_[0]->r0 * detail::vec2(sch.first[k]).transpose();
            t.R[1] = p_[1]->r0 * detail::vec2(sch.second[k]).transpose();
            terms_.push_back(std::move(t));
        }
        time_ = rho0.time;
        steps_ = 0;
    }

    void step() {
        for (auto& t : terms_)
            for (int i = 0; i < 2; ++i) {
                Mat& R = t.R[i];
                R = (R * M1T_).eval();
                if (!trivial_[i])
                    for (int a = 0; a < 4; ++a) R.col(a) = (p_[i]->Q[a] * R.col(a)).eval();
            }
        ++steps_;
        time_ += dt_;
    }

    core::DensityMatrix reduced() const {
        core::DensityMatrix r;
        r.time = time_;
        r.normalized = false;
        for (const auto& t : terms_) {
            const core::Vec4 v1 = t.R[0].transpose() * p_[0]->q;
            const core::Vec4 v2 = t.R[1].transpose() * p_[1]->q;
            const Mat2 r1 = Eigen::Map<const Mat2>(v1.data());
            const Mat2 r2 = Eigen::Map<const Mat2>(v2.data());
            r.matrix += t.c * Eigen::kroneckerProduct(r1, r2).eval();
        }
        return r;
    }

    void insert(const Mat4& L, const Mat4& Rop) {
        const auto sl = detail::operator_schmidt(L);
        const auto sr = detail::operator_schmidt(Rop.adjoint());
        std::vector<Term> out;
        for (const auto& t : terms_)
            for (std::size_t k = 0; k < sl.weight.size(); ++k)
                for (std::size_t l = 0; l < sr.weight.size(); ++l) {
                    Term n;
                    n.c = t.c * sl.weight[k] * sr.weight[l];
                    n.R[0] = t.R[0] * detail::sandwich2(sl.first[k], sr.first[l]).transpose();
                    n.R[1] = t.R[1] * detail::sandwich2(sl.second[k], sr.second[l]).transpose();
                    out.push_back(std::move(n));
                }
        terms_.swap(out);
    }
    void scale(cd z) {
        for (auto& t : terms_) t.c *= z;
    }

    Eigen::VectorXd bond_weights() const {
        Index n = 0;
        for (const auto& t : terms_) n += t.R[0].rows() + t.R[1].rows();
        Eigen::VectorXd w(n);
        Index o = 0;
        for (const auto& t : terms_)
            for (int i = 0; i < 2; ++i) {
                w.segment(o, t.R[i].rows()) = std::abs(t.c) * t.R[i].rowwise().squaredNorm();
                o += t.R[i].rows();
            }
        return w;
    }

    std::size_t steps() const { return steps_; }
    double time() const { return time_; }
    std::size_t terms() const { return terms_.size(); }

private:
    struct Term {
        cd c = 1.0;
        std::array<Mat, 2> R;
    };
    Mat4 M1T_;
    double dt_;
    std::array<PtPtr, 2> p_;
    std::array<bool, 2> trivial_{false, false};
    std::vector<Term> terms_;
    double time_ = 0.0;
    std::size_t steps_ = 0;
};

// Trajectory of reduced states every `stride` steps (step 0 included)
inline std::vector<core::DensityMatrix> propagate(const core::DensityMatrix& rho0, PtPtr p1, PtPtr p2,
                                                  const core::Superoperator& M, double dt, std::size_t n,
                                                  std::size_t stride = 1) {
    if (stride == 0) throw InvalidArgument("propagate: stride must be >= 1");
    JointEngine e(M, dt, std::move(p1), std::move(p2));
    e.init(rho0);
    std::vector<core::DensityMatrix> out{e.reduced()};
    for (std::size_t k = 1; k <= n; ++k) {
        e.step();
        if (k % stride == 0) out.push_back(e.reduced());
    }
    return out;
}

inline void insert_operator(ExtendedState& s, const core::EmitterOperator& opL, const core::EmitterOperator& opR) {
    s.R = (s.R * core::sandwich(opL.matrix, opR.matrix.adjoint()).transpose()).eval();
}

// Step indices of the composite tau grid: every fine_stride up to tau_fine, geometric beyond
inline std::vector<std::size_t> tau_steps(const Grids& g, double dt) {
    std::vector<std::size_t> s;
    auto snap = [&](double t) { return static_cast<std::size_t>(std::llround(t / dt)); };
    if (!g.tau_explicit.empty()) {
        for (double t : g.tau_explicit) {
            if (t < 0.0) throw GridMismatch("tau grid must be non-negative");
            const std::size_t k = snap(t);
            if (std::abs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, t))
                throw GridMismatch("tau " + std::to_string(t) + " ps is not a multiple of dt");
            s.push_back(k);
        }
    } else {
        const std::size_t kf = snap(std::min(g.tau_fine, g.tau_max));
        for (std::size_t k = 0; k <= kf; k += g.fine_stride) s.push_back(k);
        if (g.tau_max > g.tau_fine && g.coarse_points > 0) {
            const double t0 = std::max(g.tau_fine, dt);
            const double ratio = std::pow(g.tau_max / t0, 1.0 / static_cast<double>(g.coarse_points));
            for (double t = t0; t < g.tau_max;) {
                double next = t * ratio;
                if (g.max_spacing > 0.0) next = std::min(next, t + g.max_spacing);
                t = std::min(std::max(next, t + dt), g.tau_max);
                s.push_back(snap(t));
            }
        }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

// Kernel and PT for one emitter, with optional on-disk cache
struct PtBuild {
    PtPtr pt;
    bath::MemoryKernel kernel;
};

namespace detail {

inline PtBuild make_pt_uncached(const bath::SpectralDensity& sd, double dt, const Numerics& nu) {
    namespace fs = std::filesystem;
    PtBuild out;
    const bool cache = !nu.cache_dir.empty();
    if (cache) fs::create_directories(nu.cache_dir);
    bath::MemoryKernel k;
    const fs::path kfile = cache ? fs::path(nu.cache_dir) / bath::cache::kernel_key(sd.hash(), dt, nu.t_mem, sd.temperature)
                                 : fs::path();
    if (!cache || !bath::cache::load_kernel(kfile, sd.hash(), dt, nu.t_mem, sd.temperature, k)) {
        k = bath::build_kernel(sd, dt, nu.t_mem);
        if (cache) bath::cache::save_kernel(k, nu.t_mem, kfile);
    }
    out.kernel = k.truncated(k.effective_depth(nu.kernel_tail_tol));
    pt::BuildOptions o;
    o.svd_threshold = nu.svd_threshold;
    o.max_bond = nu.max_bond;
    o.jump_prior = nu.jump_prior;
    const std::size_t K = std::max<std::size_t>(1, out.kernel.n_steps);
    pt::cache::PtHeader h{dt, K, K, o.svd_threshold, o.max_bond, o.jump_prior, out.kernel.sd_hash};
    pt::ProcessTensor p;
    const fs::path pfile = cache ? fs::path(nu.cache_dir) / pt::cache::pt_key(h) : fs::path();
    if (!cache || !pt::cache::load_pt(pfile, h, p)) {
        p = pt::build_pt(out.kernel, K, o);
        if (cache) pt::cache::save_pt(p, pfile);
    }
    out.pt = std::make_shared<const pt::ProcessTensor>(std::move(p));
    return out;
}

}  // namespace detail

// Process-wide memo over the disk cache; concurrent requests for one key share a single build
inline PtBuild make_pt(const bath::SpectralDensity& sd, double dt, const Numerics& nu) {
    static std::mutex mu;
    static std::map<std::string, std::shared_future<PtBuild>> memo;
    std::ostringstream key;
    key.precision(17);
    key << sd.hash() << '|' << dt << '|' << nu.t_mem << '|' << nu.kernel_tail_tol << '|' << nu.svd_threshold << '|'
        << nu.max_bond << '|' << nu.jump_prior << '|' << nu.cache_dir;
    std::promise<PtBuild> prom;
    std::shared_future<PtBuild> fut;
    bool owner = false;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = memo.find(key.str());
        if (it == memo.end()) {
            fut = prom.get_future().share();
            memo.emplace(key.str(), fut);
            owner = true;
        } else {
            fut = it->second;
        }
    }
    if (owner) {
        try {
            prom.set_value(detail::make_pt_uncached(sd, dt, nu));
        } catch (...) {
            {
                std::lock_guard<std::mutex> lk(mu);
                memo.erase(key.str());
            }
            prom.set_exception(std::current_exception());
        }
    }
    return fut.get();
}

namespace detail {

inline double reference_rate(const core::LindbladSpec& s) {
    if (s.gamma > 0.0) return s.gamma;
    if (s.gamma_p > 0.0) return s.gamma_p;
    throw NoPumpNoDecay("no radiative or pump rate sets a stationarity time scale");
}

inline double default_settle(const core::LindbladSpec& s) {
    double t = 0.0;
    if (s.gamma > 0.0) t = std::max(t, 1.0 / s.gamma);
    if (s.gamma_p > 0.0) t = std::max(t, 1.0 / s.gamma_p);
    if (t == 0.0) throw NoPumpNoDecay("settle time undefined without pump or decay");
    return 20.0 * t;
}

template <class E>
void normalize_trace(E& e) {
    const cd tr = e.reduced().trace();
    if (std::abs(tr) == 0.0) throw NotStationary("trace vanished during settle");
    e.scale(1.0 / tr);
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return INFINITY;
    const double s = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / s;
}

// Fixed point of T^m (eigenvalue nearest 1) by restarted Arnoldi on the flattened extended state
inline void krylov_settle(JointEngine& e, std::size_t m, std::size_t kdim, int restarts, double tol) {
    Vec x = e.flat();
    for (int r = 0; r < restarts; ++r) {
        const Index n = x.size();
        const Index kd = std::min<Index>(static_cast<Index>(kdim), n);
        Mat V(n, kd + 1);
        Mat H = Mat::Zero(kd + 1, kd);
        V.col(0) = x / x.norm();
        Index k = 0;
        for (; k < kd; ++k) {
            e.set_flat(V.col(k));
            for (std::size_t s = 0; s < m; ++s) e.step();
            Vec w = e.flat();
            for (int pass = 0; pass < 2; ++pass)
                for (Index j = 0; j <= k; ++j) {
                    const cd h = V.col(j).dot(w);
                    H(j, k) += h;
                    w -= h * V.col(j);
                }
            H(k + 1, k) = w.norm();
            if (std::abs(H(k + 1, k)) < 1e-14) {
                ++k;
                break;
            }
            V.col(k + 1) = w / H(k + 1, k);
        }
        Eigen::ComplexEigenSolver<Mat> es(H.topLeftCorner(k, k));
        Index best = 0;
        double dist = INFINITY;
        for (Index i = 0; i < k; ++i)
            if (std::abs(es.eigenvalues()(i) - 1.0) < dist) {
                dist = std::abs(es.eigenvalues()(i) - 1.0);
                best = i;
            }
        const Vec y = es.eigenvectors().col(best);
        x = V.leftCols(k) * y;
        const double resid = k < kd ? 0.0 : std::abs(H(k, k - 1) * y(k - 1)) / y.norm();
        e.set_flat(x);
        normalize_trace(e);
        x = e.flat();
        if (resid < tol) break;
    }
}

struct SettleReport {
    std::string method;
    double time = 0.0;
    double residual = 0.0;
};

// Run to stationarity, then certify with ||rho(t) - rho(t - 1/gamma)|| and bond weights
template <class E>
SettleReport settle(E& e, const Scenario& sc, double dt, bool krylov) {
    const core::LindbladSpec ms = sc.markov_spec();
    const double t_settle = sc.grids.t_settle > 0.0 ? sc.grids.t_settle : default_settle(ms);
    const std::size_t n_settle = static_cast<std::size_t>(std::ceil(t_settle / dt - 1e-9));
    const std::size_t m_check = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / reference_rate(ms) / dt)));
    SettleReport rep;
    if (krylov) {
        if constexpr (std::is_same_v<E, JointEngine>) {
            const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(20.0 / dt)));
            krylov_settle(e, m, 40, 8, 1e-13);
        }
        rep.method = "krylov";
    } else {
        rep.method = "propagate";
        const std::size_t pre = n_settle > m_check ? n_settle - m_check : 0;
        for (std::size_t k = 0; k < pre; ++k) {
            e.step();
            if (k % 64 == 0) normalize_trace(e);
        }
    }
    normalize_trace(e);
    const core::DensityMatrix a = e.reduced();
    const Eigen::VectorXd wa = e.bond_weights();
    for (std::size_t k = 0; k < m_check; ++k) {
        e.step();
        if (k % 64 == 0) normalize_trace(e);
    }
    normalize_trace(e);
    const core::DensityMatrix b = e.reduced();
    const Eigen::VectorXd wb = e.bond_weights();
    const double dr = (a.matrix - b.matrix).cwiseAbs().maxCoeff();
    const double dw = max_abs_diff(wa / wa.sum(), wb / wb.sum());
    rep.residual = std::max(dr, dw);
    rep.time = krylov ? INFINITY : static_cast<double>(std::max(n_settle, m_check)) * dt;
    if (!(rep.residual < sc.numerics.stationarity_tol))
        throw NotStationary("stationarity check failed: residual " + std::to_string(rep.residual));
    return rep;
}

inline CurveNumerics base_numerics(const Scenario& sc, double dt, const PtBuild* b) {
    CurveNumerics n;
    n.dt = dt;
    if (b) {
        n.memory = b->kernel.n_steps;
        n.t_mem = static_cast<double>(b->kernel.n_steps) * dt;
        n.kernel_truncation = b->kernel.truncation_error;
        n.svd_threshold = sc.numerics.svd_threshold;
        n.max_bond = sc.numerics.max_bond;
        n.jump_prior = sc.numerics.jump_prior;
        n.bond = static_cast<std::size_t>(b->pt->bond());
        for (auto d : b->pt->build_bonds) n.build_bond_max = std::max(n.build_bond_max, d);
    }
    return n;
}

inline bool use_product(const Scenario& sc) {
    switch (sc.numerics.engine) {
        case EngineKind::Product:
            if (sc.lindblad.decay_mode != core::DecayMode::Independent)
                throw InvalidArgument("product engine requires independent decay");
            return true;
        case EngineKind::Joint: return false;
        default: return sc.lindblad.decay_mode == core::DecayMode::Independent;
    }
}

template <class E>
G2Curve run_g2(E& e, const Scenario& sc, double dt, bool nontrivial, CurveNumerics num) {
    const core::LindbladSpec ms = sc.markov_spec();
    e.init(core::steady_state(core::lindblad_generator(ms)));
    bool krylov = false;
    if constexpr (std::is_same_v<E, JointEngine>) {
        krylov = sc.numerics.settle == SettleKind::Krylov || (sc.numerics.settle == SettleKind::Auto && nontrivial);
    }
    const SettleReport rep = settle(e, sc, dt, krylov);
    num.engine = E::kName;
    num.settle = rep.method;
    num.settle_time = rep.time;
    num.stationarity_residual = rep.residual;

    const core::DensityMatrix rho_ss = e.reduced();
    const Mat4 A = sc.detection.lowering().matrix;
    const Mat4 AdA = A.adjoint() * A;
    const double I0 = (AdA * rho_ss.matrix).trace().real();
    if (!(I0 > 1e-14)) throw ZeroIntensity("g2_curve: stationary intensity vanishes");

    e.insert(A, A);
    const auto steps = tau_steps(sc.grids, dt);
    G2Curve out;
    out.I0 = I0;
    out.scenario = sc;
    double drift = 0.0;
    std::size_t k = 0;
    for (std::size_t s : steps) {
        while (k < s) {
            e.step();
            ++k;
        }
        const core::DensityMatrix r = e.reduced();
        const double tr = r.trace().real();
        drift = std::max(drift, std::abs(tr / I0 - 1.0));
        out.tau.push_back(static_cast<double>(s) * dt);
        out.g2.push_back((AdA * r.matrix).trace().real() / (I0 * tr));
    }
    num.trace_drift = drift;
    out.numerics = num;
    return out;
}

inline G2Curve g2_at(const Scenario& sc, double dt) {
    std::optional<PtBuild> b;
    PtPtr p;
    if (sc.phonons) {
        b = make_pt(*sc.phonons, dt, sc.numerics);
        p = b->pt;
    } else {
        p = std::make_shared<const pt::ProcessTensor>(pt::ProcessTensor::trivial(dt, 1));
    }
    const CurveNumerics num = base_numerics(sc, dt, b ? &*b : nullptr);
    const bool nontrivial = sc.phonons && !p->is_trivial();
    if (use_product(sc)) {
        ProductEngine e(sc.markov_spec(), dt, p, p);
        return run_g2(e, sc, dt, nontrivial, num);
    }
    JointEngine e(core::propagator(core::lindblad_generator(sc.markov_spec()), dt), dt, p, p);
    return run_g2(e, sc, dt, nontrivial, num);
}

}  // namespace detail

// Stationary g2(tau) through the process-tensor pipeline (trivial tensors without phonons)
inline G2Curve g2_curve(const Scenario& sc) {
    sc.validate();
    const double dt = sc.grids.dt;
    G2Curve c = detail::g2_at(sc, dt);
    if (!sc.numerics.richardson || !sc.phonons) return c;
    Scenario fine = sc;
    fine.grids.dt = 0.5 * dt;
    fine.grids.tau_explicit = c.tau;
    const G2Curve f = detail::g2_at(fine, 0.5 * dt);
    // tau steps of dt map to even steps of dt/2
    std::size_t j = 0;
    for (std::size_t i = 0; i < c.tau.size(); ++i) {
        while (j < f.tau.size() && f.tau[j] < c.tau[i] - 1e-9 * dt) ++j;
        if (j == f.tau.size() || std::abs(f.tau[j] - c.tau[i]) > 1e-9 * std::max(1.0, c.tau[i]))
            throw GridMismatch("Richardson grids disagree");
        c.g2[i] = 2.0 * f.g2[j] - c.g2[i];
    }
    c.I0 = 2.0 * f.I0 - c.I0;
    c.numerics.richardson = true;
    c.numerics.bond = std::max(c.numerics.bond, f.numerics.bond);
    c.numerics.build_bond_max = std::max(c.numerics.build_bond_max, f.numerics.build_bond_max);
    c.numerics.trace_drift = std::max(c.numerics.trace_drift, f.numerics.trace_drift);
    c.numerics.stationarity_residual = std::max(c.numerics.stationarity_residual, f.numerics.stationarity_residual);
    return c;
}

// Markovian reference: steady state plus quantum regression, exp(L tau) evaluated per tau
inline G2Curve g2_regression(const Scenario& sc, const std::vector<double>& taus) {
    sc.validate();
    if (sc.phonons) throw InvalidArgument("g2_regression: Markovian scenarios only");
    const core::Superoperator L = core::lindblad_generator(sc.markov_spec());
    const core::DensityMatrix rho = core::steady_state(L);
    const Mat4 A = sc.detection.lowering().matrix;
    const Mat4 AdA = A.adjoint() * A;
    const double I0 = (AdA * rho.matrix).trace().real();
    if (!(I0 > 1e-14)) throw ZeroIntensity("g2_regression: stationary intensity vanishes");
    const Vec16 r1 = core::DensityMatrix{A * rho.matrix * A.adjoint()}.vec();
    const Eigen::Matrix<cd, 1, 16> obs = Eigen::Map<const Vec16>(Mat4(AdA.transpose()).data()).transpose();
    G2Curve out;
    out.I0 = I0;
    out.scenario = sc;
    out.numerics.engine = "regression";
    for (double t : taus) {
        const double at = std::abs(t);
        const Vec16 v = at == 0.0 ? r1 : Vec16(Mat16(L.matrix * at).exp() * r1);
        out.tau.push_back(t);
        out.g2.push_back((obs * v)(0).real() / (I0 * I0));
    }
    return out;
}

namespace detail {

inline CoherenceTrajectory coherence_at(const Scenario& sc, const core::DensityMatrix& rho0,
                                        const std::vector<std::size_t>& steps, double dt) {
    std::optional<PtBuild> b;
    PtPtr p;
    if (sc.phonons) {
        b = make_pt(*sc.phonons, dt, sc.numerics);
        p = b->pt;
    } else {
        p = std::make_shared<const pt::ProcessTensor>(pt::ProcessTensor::trivial(dt, 1));
    }
    CoherenceTrajectory out;
    out.scenario = sc;
    out.numerics = base_numerics(sc, dt, b ? &*b : nullptr);
    auto run = [&](auto& e) {
        out.numerics.engine = std::decay_t<decltype(e)>::kName;
        e.init(rho0);
        std::size_t k = 0;
        for (std::size_t s : steps) {
            while (k < s) {
                e.step();
                ++k;
            }
            const core::DensityMatrix r = e.reduced();
            out.t.push_back(static_cast<double>(s) * dt);
            out.c.push_back(r.c());
            out.numerics.trace_drift = std::max(out.numerics.trace_drift, std::abs(r.trace().real() - rho0.weight()));
        }
    };
    if (use_product(sc)) {
        ProductEngine e(sc.markov_spec(), dt, p, p);
        run(e);
    } else {
        JointEngine e(core::propagator(core::lindblad_generator(sc.markov_spec()), dt), dt, p, p);
        run(e);
    }
    return out;
}

inline CoherenceTrajectory coherence_richardson(const Scenario& sc, const core::DensityMatrix& rho0,
                                                const std::vector<std::size_t>& steps) {
    const double dt = sc.grids.dt;
    CoherenceTrajectory c = coherence_at(sc, rho0, steps, dt);
    if (!sc.numerics.richardson || !sc.phonons) return c;
    Scenario fine = sc;
    fine.grids.dt = 0.5 * dt;
    std::vector<std::size_t> fine_steps;
    for (std::size_t s : steps) fine_steps.push_back(2 * s);
    const CoherenceTrajectory f = coherence_at(fine, rho0, fine_steps, 0.5 * dt);
    if (f.c.size() != c.c.size()) throw GridMismatch("Richardson grids disagree");
    for (std::size_t i = 0; i < c.c.size(); ++i) c.c[i] = 2.0 * f.c[i] - c.c[i];
    c.numerics.richardson = true;
    c.numerics.bond = std::max(c.numerics.bond, f.numerics.bond);
    return c;
}

}  // namespace detail

// c(t) = <e1 g2| rho(t) |g1 e2> every `stride` steps on [0, t_max]
inline CoherenceTrajectory coherence_trajectory(const Scenario& sc, const core::DensityMatrix& rho0, double t_max,
                                                std::size_t stride = 1) {
    sc.validate();
    if (stride == 0) throw InvalidArgument("coherence_trajectory: stride must be >= 1");
    if (!(t_max >= 0.0)) throw InvalidArgument("coherence_trajectory: t_max must be non-negative");
    const double dt = sc.grids.dt;
    const std::size_t n = static_cast<std::size_t>(std::llround(t_max / dt));
    std::vector<std::size_t> steps;
    for (std::size_t k = 0; k <= n; k += stride) steps.push_back(k);
    return detail::coherence_richardson(sc, rho0, steps);
}

// c(t) on the composite grid of sc.grids (fine linear part, geometric tail up to tau_max)
inline CoherenceTrajectory coherence_curve(const Scenario& sc, const core::DensityMatrix& rho0) {
    sc.validate();
    return detail::coherence_richardson(sc, rho0, tau_steps(sc.grids, sc.grids.dt));
}

// ---- CSV ----

namespace csv {

inline constexpr int kSchemaVersion = 1;

inline std::string fmt(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

inline std::vector<std::pair<std::string, std::string>> scenario_fields(const Scenario& sc) {
    std::vector<std::pair<std::string, std::string>> f;
    f.emplace_back("geometry", to_string(sc.geometry));
    f.emplace_back("gamma_per_ps", fmt(sc.lindblad.gamma));
    f.emplace_back("gamma_p_per_ps", fmt(sc.lindblad.gamma_p));
    f.emplace_back("gamma_d_per_ps", fmt(sc.lindblad.gamma_d));
    f.emplace_back("ppd_extra_per_ps", fmt(sc.ppd_extra));
    f.emplace_back("detector_phases_rad", fmt(sc.detection.phi1) + " " + fmt(sc.detection.phi2));
    if (sc.phonons) {
        const auto& s = *sc.phonons;
        f.emplace_back("phonons", s.kind == bath::SdKind::Ohmic ? "ohmic" : s.kind == bath::SdKind::Tabulated ? "tabulated" : "inGaAs-deformation");
        f.emplace_back("sd_hash", std::to_string(s.hash()));
        f.emplace_back("temperature_K", fmt(s.temperature));
        f.emplace_back("sd_scale", fmt(s.scale));
    } else {
        f.emplace_back("phonons", "none");
    }
    f.emplace_back("dt_ps", fmt(sc.grids.dt));
    f.emplace_back("tau_max_ps", fmt(sc.grids.tau_max));
    f.emplace_back("t_mem_ps", fmt(sc.numerics.t_mem));
    f.emplace_back("svd_threshold", fmt(sc.numerics.svd_threshold));
    f.emplace_back("max_bond", std::to_string(sc.numerics.max_bond));
    f.emplace_back("jump_prior", fmt(sc.numerics.jump_prior));
    return f;
}

inline std::vector<std::pair<std::string, std::string>> numerics_fields(const CurveNumerics& n) {
    return {{"engine", n.engine},
            {"settle", n.settle},
            {"richardson", n.richardson ? "1" : "0"},
            {"memory_steps", std::to_string(n.memory)},
            {"kernel_truncation", fmt(n.kernel_truncation)},
            {"bond", std::to_string(n.bond)},
            {"build_bond_max", std::to_string(n.build_bond_max)},
            {"stationarity_residual", fmt(n.stationarity_residual)},
            {"trace_drift", fmt(n.trace_drift)}};
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string header(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::ostringstream body;
    for (const auto& [k, v] : fields) body << "# " << k << "=" << v << "\n";
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(fnv1a(body.str())));
    std::ostringstream os;
    os << "# coopem_csv_schema=" << kSchemaVersion << "\n" << body.str() << "# fingerprint=" << fp << "\n";
    return os.str();
}

inline std::string g2_text(const G2Curve& c, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    auto f = scenario_fields(c.scenario);
    for (auto& x : numerics_fields(c.numerics)) f.push_back(x);
    f.emplace_back("I0", fmt(c.I0));
    for (const auto& x : extra) f.push_back(x);
    std::ostringstream os;
    os << header(f) << "tau_ps,g2\n";
    for (std::size_t i = 0; i < c.tau.size(); ++i) os << fmt(c.tau[i]) << "," << fmt(c.g2[i]) << "\n";
    return os.str();
}

inline std::string coherence_text(const CoherenceTrajectory& c) {
    auto f = scenario_fields(c.scenario);
    for (auto& x : numerics_fields(c.numerics)) f.push_back(x);
    std::ostringstream os;
    os << header(f) << "t_ps,re_c,im_c\n";
    for (std::size_t i = 0; i < c.t.size(); ++i)
        os << fmt(c.t[i]) << "," << fmt(c.c[i].real()) << "," << fmt(c.c[i].imag()) << "\n";
    return os.str();
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream os(file);
    if (!os) throw InvalidArgument("cannot write " + file.string());
    os << text;
}

// Reads tau_ps,g2 rows and "# key=value" headers
struct Table {
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<double> x, y;
};

inline Table read_two_column(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw InvalidArgument("cannot read " + file.string());
    Table t;
    std::string line;
    bool names = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) t.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (!names) {
            names = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("malformed row in " + file.string());
        t.x.push_back(std::stod(line.substr(0, comma)));
        t.y.push_back(std::stod(line.substr(comma + 1)));
    }
    return t;
}

}  // namespace csv

}  // namespace coopem::dyn
