// test_process_tensor.cpp — MPO construction against the explicit influence-functional path sum

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "coopem/process_tensor.hpp"

using namespace coopem;
using cd = std::complex<double>;

namespace {

// Influence functional of an explicit path; pair a = mu + 2 nu with mu, nu the ket/bra occupations
cd influence(const std::vector<cd>& eta, const std::vector<int>& path) {
    auto ket = [](int a) { return static_cast<double>(a % 2); };
    auto bra = [](int a) { return static_cast<double>(a / 2); };
    cd phase = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k)
        for (std::size_t j = 0; j <= k; ++j) {
            const std::size_t lag = k - j;
            if (lag >= eta.size()) continue;
            const double xk = ket(path[k]) - bra(path[k]);
            phase += xk * (eta[lag] * ket(path[j]) - std::conj(eta[lag]) * bra(path[j]));
        }
    return std::exp(-phase);
}

bath::MemoryKernel random_kernel(std::mt19937& g, std::size_t K, double scale) {
    std::normal_distribution<double> n;
    bath::MemoryKernel k;
    k.dt = 0.1;
    k.n_steps = K;
    for (std::size_t i = 0; i <= K; ++i) k.eta.emplace_back(scale * n(g), scale * n(g));
    k.eta[0] = cd(std::abs(k.eta[0].real()), k.eta[0].imag());
    return k;
}

std::vector<int> decode(std::size_t idx, std::size_t n) {
    std::vector<int> p(n);
    for (std::size_t j = 0; j < n; ++j) {
        p[j] = static_cast<int>(idx % 4);
        idx /= 4;
    }
    return p;
}

}  // namespace

struct OracleCase {
    double jump_prior;
    std::size_t K;
    unsigned seed;
};

class BruteForceOracle : public ::testing::TestWithParam<OracleCase> {};

TEST_P(BruteForceOracle, ContractionEqualsPathSum) {
    const auto c = GetParam();
    std::mt19937 g(c.seed);
    const auto k = random_kernel(g, c.K, 0.3);
    pt::BuildOptions o;
    o.svd_threshold = 1e-14;
    o.jump_prior = c.jump_prior;
    const auto P = pt::build_pt(k, 8, o);
    double err = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto all = pt::contract_paths(P, n);
        ASSERT_EQ(all.size(), std::size_t(1) << (2 * n));
        for (std::size_t i = 0; i < all.size(); ++i) {
            const auto path = decode(i, n);
            err = std::max(err, std::abs(all[i] - influence(k.eta, path)));
            if (i % 37 == 0) err = std::max(err, std::abs(pt::evaluate_path(P, path) - all[i]));
        }
    }
    EXPECT_LT(err, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Randomized, BruteForceOracle,
                         ::testing::Values(OracleCase{0.75, 1, 1}, OracleCase{0.75, 2, 2}, OracleCase{0.75, 3, 3},
                                           OracleCase{0.75, 4, 4}, OracleCase{0.75, 5, 5}, OracleCase{0.2, 2, 6},
                                           OracleCase{0.2, 4, 7}, OracleCase{0.03, 3, 8}, OracleCase{0.01, 4, 9},
                                           OracleCase{0.01, 5, 10}));

TEST(ProcessTensor, BeyondMemoryRepeatsUniformBlocks) {
    std::mt19937 g(11);
    const auto k = random_kernel(g, 2, 0.2);
    pt::BuildOptions o;
    o.svd_threshold = 1e-14;
    const auto P = pt::build_pt(k, 8, o);
    // n = 6 > K: lags beyond the kernel depth contribute nothing
    const auto all = pt::contract_paths(P, 6);
    double err = 0.0;
    for (std::size_t i = 0; i < all.size(); i += 7) err = std::max(err, std::abs(all[i] - influence(k.eta, decode(i, 6))));
    EXPECT_LT(err, 1e-9);
}

TEST(ProcessTensor, ZeroKernelIsTrivial) {
    bath::MemoryKernel z;
    z.dt = 0.1;
    z.n_steps = 4;
    z.eta.assign(5, cd(0.0));
    EXPECT_TRUE(pt::build_pt(z, 8, pt::BuildOptions{}).is_trivial());
    pt::BuildOptions o;
    o.jump_prior = 0.05;
    EXPECT_TRUE(pt::build_pt(z, 8, o).is_trivial());
    EXPECT_TRUE(pt::ProcessTensor::trivial(0.1, 3).is_trivial());
}

TEST(ProcessTensor, TruncationErrorShrinksWithThreshold) {
    const auto sd = bath::SpectralDensity::inGaAs_deformation(4.0);
    const auto k = bath::build_kernel(sd, 0.5, 3.0);
    pt::BuildOptions loose, tight;
    loose.svd_threshold = 1e-4;
    tight.svd_threshold = 1e-10;
    const auto a = pt::build_pt(k, k.n_steps, loose), b = pt::build_pt(k, k.n_steps, tight);
    EXPECT_LE(a.bond(), b.bond());
    std::mt19937 g(2);
    std::uniform_int_distribution<int> u(0, 3);
    double ea = 0.0, eb = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> path(8);
        for (auto& x : path) x = u(g);
        const cd ref = influence(k.eta, path);
        ea = std::max(ea, std::abs(pt::evaluate_path(a, path) - ref));
        eb = std::max(eb, std::abs(pt::evaluate_path(b, path) - ref));
    }
    EXPECT_LT(eb, 1e-7);
    EXPECT_LE(eb, ea + 1e-12);
}

TEST(ProcessTensor, MaxBondIsRespected) {
    const auto k = bath::build_kernel(bath::SpectralDensity::inGaAs_deformation(4.0), 0.5, 3.0);
    pt::BuildOptions o;
    o.svd_threshold = 1e-14;
    o.max_bond = 5;
    EXPECT_THROW(pt::build_pt(k, k.n_steps, o), BondOverflow);
    o.svd_threshold = 1e-3;
    o.max_bond = 64;
    const auto P = pt::build_pt(k, k.n_steps, o);
    o.max_bond = P.bond();
    const auto Q = pt::build_pt(k, k.n_steps, o);
    EXPECT_EQ(Q.bond(), P.bond());
    for (auto d : Q.build_bonds) EXPECT_LE(d, o.max_bond);
}

TEST(ProcessTensor, Errors) {
    bath::MemoryKernel z;
    z.dt = 0.1;
    z.n_steps = 1;
    z.eta.assign(2, cd(0.0));
    EXPECT_THROW(pt::build_pt(z, 0, pt::BuildOptions{}), InvalidArgument);
    pt::BuildOptions o;
    o.jump_prior = 1.0;
    EXPECT_THROW(pt::build_pt(z, 2, o), InvalidArgument);
}

TEST(PtCache, RoundTripBitIdentical) {
    namespace fs = std::filesystem;
    std::mt19937 g(21);
    const auto k = random_kernel(g, 3, 0.2);
    const auto P = pt::build_pt(k, 3, pt::BuildOptions{});
    const fs::path dir = fs::temp_directory_path() / "coopem_pt_cache_test";
    fs::create_directories(dir);
    const auto h = pt::cache::header_of(P);
    const fs::path f = dir / pt::cache::pt_key(h);
    pt::cache::save_pt(P, f);
    pt::ProcessTensor back;
    ASSERT_TRUE(pt::cache::load_pt(f, h, back));
    ASSERT_EQ(back.bond(), P.bond());
    for (int a = 0; a < 4; ++a) EXPECT_EQ((back.Q[a] - P.Q[a]).cwiseAbs().maxCoeff(), 0.0);
    auto other = h;
    other.dt *= 2.0;
    EXPECT_FALSE(pt::cache::load_pt(f, other, back));
    fs::remove_all(dir);
}
