#include <catch2/catch_amalgamated.hpp>

#include "rlsa2c/kfac.hpp"
#include "rlsa2c/trainer.hpp"  // is_spd
#include "oracles.hpp"

using namespace rlsa2c;

namespace {

KfacActorState make_state(std::size_t in, std::size_t out) {
    KfacActorState s;
    s.p1 = Mat::identity(in);
    s.p2 = Mat::identity(out);
    s.w.assign(in * out, 0.0);
    return s;
}

double residual_ms(const KfacActorState& s, const Mat& x, const Mat& gz,
                   const std::vector<double>& adv) {
    double total = 0;
    std::vector<double> xi(x.cols), gi(gz.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) xi[j] = x(i, j);
        for (std::size_t j = 0; j < gz.cols; ++j) gi[j] = gz(i, j);
        const double r = adv[i] - compatible_advantage(s.w, xi, gi);
        total += r * r;
    }
    return total / double(x.rows);
}

}  // namespace

TEST_CASE("p1 update with zero input scales by 1/lambda") {
    KfacActorState s = make_state(3, 2);
    s.lambda = 0.5;
    kfac_p1_update(s, Mat(4, 3), 0.1);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(s.p1(i, i) == Catch::Approx(2.0));
}

TEST_CASE("p1 update with M=1 matches the direct inverse") {
    Rng rng(1);
    KfacActorState s = make_state(4, 2);
    s.p1 = oracle::random_spd(4, rng);
    Mat p0 = s.p1;
    Mat x(1, 4);
    for (double& v : x.data) v = rng.uniform(-1, 1);
    const double k = 0.3;
    kfac_p1_update(s, x, k);

    Mat pinv = oracle::invert(p0);
    Mat h(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            h(i, j) = pinv(i, j) + k * x.data[i] * x.data[j];
    REQUIRE(oracle::max_abs_diff(s.p1, oracle::invert(h)) < 1e-10);
}

TEST_CASE("p1 stays SPD over 500 random updates") {
    Rng rng(2);
    KfacActorState s = make_state(5, 2);
    for (int it = 0; it < 500; ++it) {
        Mat x = oracle::random_mat(6, 5, rng);
        kfac_p1_update(s, x, 0.1);
    }
    REQUIRE(is_spd(s.p1));
}

TEST_CASE("p2 update zero input and M=1 exactness") {
    KfacActorState s = make_state(2, 3);
    s.lambda = 0.25;
    kfac_p2_update(s, Mat(5, 3), 0.1);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(s.p2(i, i) == Catch::Approx(4.0));

    Rng rng(3);
    KfacActorState s2 = make_state(2, 3);
    s2.p2 = oracle::random_spd(3, rng);
    Mat p0 = s2.p2;
    Mat g(1, 3);
    for (double& v : g.data) v = rng.uniform(-1, 1);
    kfac_p2_update(s2, g, 0.2);
    Mat pinv = oracle::invert(p0);
    Mat h(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) h(i, j) = pinv(i, j) + 0.2 * g.data[i] * g.data[j];
    REQUIRE(oracle::max_abs_diff(s2.p2, oracle::invert(h)) < 1e-10);
}

TEST_CASE("p factors are symmetric after updates") {
    Rng rng(4);
    KfacActorState s = make_state(4, 3);
    for (int it = 0; it < 20; ++it) {
        kfac_p1_update(s, oracle::random_mat(5, 4, rng), 0.1);
        kfac_p2_update(s, oracle::random_mat(5, 3, rng), 0.1);
    }
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            REQUIRE(std::abs(s.p1(i, j) - s.p1(j, i)) < 1e-9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(std::abs(s.p2(i, j) - s.p2(j, i)) < 1e-9);
}

TEST_CASE("compatible_advantage basics") {
    std::vector<double> x = {1, 2}, g = {3, 4};
    REQUIRE(compatible_advantage(std::vector<double>(4, 0.0), x, g) == 0.0);

    // w = vec(x g^T) -> A = ||x||^2 ||g||^2
    std::vector<double> w = {3, 4, 6, 8};
    REQUIRE(compatible_advantage(w, x, g) == Catch::Approx(5.0 * 25.0).margin(1e-12));
}

TEST_CASE("compatible_advantage matches the explicit outer-product path") {
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x = oracle::random_vec(4, rng);
        std::vector<double> g = oracle::random_vec(3, rng);
        std::vector<double> w = oracle::random_vec(12, rng);
        double want = 0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 3; ++j) want += w[i * 3 + j] * x[i] * g[j];
        REQUIRE(compatible_advantage(w, x, g) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("single-sample Kronecker outer-product identity") {
    Rng rng(6);
    for (std::size_t n = 1; n <= 6; ++n)
        for (std::size_t m = 1; m <= 6; ++m) {
            std::vector<double> x = oracle::random_vec(n, rng);
            std::vector<double> g = oracle::random_vec(m, rng);
            Mat outer(n, m);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) outer(i, j) = x[i] * g[j];
            std::vector<double> v = vec_rowmajor(outer);
            Mat lhs(n * m, n * m);
            for (std::size_t i = 0; i < n * m; ++i)
                for (std::size_t j = 0; j < n * m; ++j) lhs(i, j) = v[i] * v[j];
            Mat xxt(n, n), ggt(m, m);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) xxt(i, j) = x[i] * x[j];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) ggt(i, j) = g[i] * g[j];
            REQUIRE(oracle::max_abs_diff(lhs, oracle::kron(xxt, ggt)) < 1e-12);
        }
}

TEST_CASE("w update leaves w alone at zero residual") {
    Rng rng(7);
    KfacActorState s = make_state(3, 2);
    s.w = oracle::random_vec(6, rng);
    Mat x = oracle::random_mat(5, 3, rng);
    Mat gz = oracle::random_mat(5, 2, rng);
    std::vector<double> adv(5);
    std::vector<double> xi(3), gi(2);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) xi[j] = x(i, j);
        for (std::size_t j = 0; j < 2; ++j) gi[j] = gz(i, j);
        adv[i] = compatible_advantage(s.w, xi, gi);
    }
    std::vector<double> before = s.w;
    kfac_w_update(s, x, gz, adv, 0.1);
    REQUIRE(oracle::max_abs_diff(s.w, before) < 1e-14);
}

TEST_CASE("w update with identity factors, k=0, M=1 is one LMS step") {
    KfacActorState s = make_state(2, 2);
    Mat x(1, 2);
    x(0, 0) = 1;
    x(0, 1) = -1;
    Mat gz(1, 2);
    gz(0, 0) = 0.5;
    gz(0, 1) = 2;
    const double a = 3.0;
    kfac_w_update(s, x, gz, {a}, 0.0);
    // residual = a (w starts at 0); w' = residual * vec(x g^T)
    REQUIRE(s.w[0] == Catch::Approx(a * 0.5));
    REQUIRE(s.w[1] == Catch::Approx(a * 2.0));
    REQUIRE(s.w[2] == Catch::Approx(a * -0.5));
    REQUIRE(s.w[3] == Catch::Approx(a * -2.0));
}

TEST_CASE("residual mean square decreases monotonically on a frozen batch") {
    Rng rng(8);
    KfacActorState s = make_state(4, 3);
    Mat x = oracle::random_mat(10, 4, rng);
    Mat gz = oracle::random_mat(10, 3, rng);
    std::vector<double> adv = oracle::random_vec(10, rng);
    double prev = residual_ms(s, x, gz, adv);
    for (int it = 0; it < 50; ++it) {
        kfac_w_update(s, x, gz, adv, 0.1);
        const double cur = residual_ms(s, x, gz, adv);
        REQUIRE(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("literal sign flag reverses the update direction") {
    Rng rng(9);
    KfacActorState a = make_state(3, 2), b = make_state(3, 2);
    b.literal_gw_sign = true;
    Mat x = oracle::random_mat(4, 3, rng);
    Mat gz = oracle::random_mat(4, 2, rng);
    std::vector<double> adv = oracle::random_vec(4, rng);
    kfac_w_update(a, x, gz, adv, 0.1);
    kfac_w_update(b, x, gz, adv, 0.1);
    for (std::size_t i = 0; i < a.w.size(); ++i)
        REQUIRE(a.w[i] == Catch::Approx(-b.w[i]).margin(1e-15));
}

TEST_CASE("npg step adds alpha m(w) elementwise") {
    Rng rng(10);
    KfacActorState s = make_state(3, 2);
    s.w = oracle::random_vec(6, rng);
    Mat theta = oracle::random_mat(3, 2, rng);
    Mat before = theta;

    Mat unchanged = theta;
    npg_actor_step(s, unchanged, 0.0);
    REQUIRE(unchanged.data == before.data);

    KfacActorState zero = make_state(3, 2);
    npg_actor_step(zero, theta, 0.7);
    REQUIRE(theta.data == before.data);

    npg_actor_step(s, theta, 0.7);
    for (std::size_t i = 0; i < theta.size(); ++i)
        REQUIRE(theta.data[i] == Catch::Approx(before.data[i] + 0.7 * s.w[i]).margin(1e-15));
}

TEST_CASE("alpha schedule") {
    KfacActorState s = make_state(1, 1);
    REQUIRE(alpha_schedule(s, 0) == 0.01);
    REQUIRE(alpha_schedule(s, 5000) == Catch::Approx(0.008));
    REQUIRE(alpha_schedule(s, 1000000) == 0.001);
}
