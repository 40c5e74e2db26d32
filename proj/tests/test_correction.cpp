#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "snninit/correction.hpp"
#include "snninit/rng.hpp"

using namespace snninit;

TEST_CASE("random walk endpoint pmf") {
    CHECK(random_walk_endpoint_pmf(0, 0) == doctest::Approx(1.0));
    CHECK(random_walk_endpoint_pmf(2, 0) == doctest::Approx(0.5));
    CHECK(random_walk_endpoint_pmf(2, 1) == 0.0);  // wrong parity
    CHECK(random_walk_endpoint_pmf(2, 4) == 0.0);  // out of range
    CHECK(random_walk_endpoint_pmf(7, 1) == doctest::Approx(35.0 / 128.0).epsilon(1e-14));
    // symmetric and normalised
    double total = 0.0;
    for (int k = -10; k <= 10; ++k) {
        CHECK(random_walk_endpoint_pmf(10, k) == doctest::Approx(random_walk_endpoint_pmf(10, -k)));
        total += random_walk_endpoint_pmf(10, k);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("conditioned crossing probability: pinned small cases") {
    // N=1, M=1, barrier 1: paths (+-) and (-+); only (+-) reaches 1 -> 1/2
    CHECK(rw_spike_probability({1, 1, 1}) == doctest::Approx(0.5));
    // barrier above the excitatory count is unreachable
    CHECK(rw_spike_probability({3, 2, 4}) == 0.0);
    // endpoint beyond the barrier is a sure crossing
    CHECK(rw_spike_probability({5, 1, 2}) == doctest::Approx(1.0));
    // N=3, M=1 (k=2), barrier 3: reflected endpoint 2*3-2=4, P(X4=4)/P(X4=2)=1/4
    CHECK(rw_spike_probability({3, 1, 3}) == doctest::Approx(0.25));
    CHECK_THROWS(rw_spike_probability({-1, 0, 1}));
}

TEST_CASE("conditioned crossing probability equals exhaustive path enumeration") {
    // all sign sequences up to length 12 here (the acceptance suite goes to 16)
    for (int n = 1; n <= 12; ++n) {
        // counts[y][k_index]: paths with running max >= y and endpoint k
        std::vector<std::map<int, long>> reach(n + 2);
        std::map<int, long> endpoint;
        for (long bits = 0; bits < (1L << n); ++bits) {
            int pos = 0, peak = 0;
            for (int s = 0; s < n; ++s) {
                pos += (bits >> s) & 1 ? 1 : -1;
                peak = std::max(peak, pos);
            }
            endpoint[pos]++;
            for (int y = 1; y <= peak; ++y) reach[y][pos]++;
        }
        for (int N = 0; N <= n; ++N) {
            const int M = n - N, k = N - M;
            for (int y = 1; y <= n + 1; ++y) {
                const double expected =
                    y > n ? 0.0
                          : static_cast<double>(reach[y].count(k) ? reach[y][k] : 0) /
                                static_cast<double>(endpoint[k]);
                const double got = rw_spike_probability({N, M, y});
                CHECK(std::abs(got - expected) < 1e-12);
            }
        }
    }
}

TEST_CASE("barrier step count from membrane state") {
    CHECK(rw_barrier(0.7, 0.01, 1.0) == 30);
    CHECK(rw_barrier(0.995, 0.01, 1.0) == 1);
    CHECK(rw_barrier(1.2, 0.01, 1.0) <= 0);
    CHECK_THROWS(rw_barrier(0.5, 0.0, 1.0));
    LifParams p;
    p.tau = 10e-3;
    p.dt = 1e-3;
    p.i_ext = 0.8;
    const double vdet = p.alpha() * 0.5 + (1 - p.alpha()) * 0.8;
    CHECK(rw_barrier(p, 0.5, 0.01) == static_cast<std::int64_t>(std::ceil((1.0 - vdet) / 0.01)));
}

TEST_CASE("bridge crossing probability: closed form values") {
    CHECK(wiener_spike_probability({1.0, 0.0, 1.0}) == doctest::Approx(std::exp(-2.0)));
    CHECK(wiener_spike_probability({1.0, 1.5, 1.0}) == 1.0);   // endpoint past barrier
    CHECK(wiener_spike_probability({-0.5, -2.0, 1.0}) == 1.0); // barrier below start
    CHECK(wiener_spike_probability({2.0, 1.0, 0.5}) == doctest::Approx(std::exp(-2.0 * 2.0 * 1.0 / 0.5)));
    CHECK_THROWS(wiener_spike_probability({1.0, 0.0, 0.0}));
}

TEST_CASE("bridge crossing is the scaling limit of the conditioned walk") {
    // random walk with n steps, endpoint k, barrier y ~ Brownian bridge with
    // w_end = k/sqrt(n), m = y/sqrt(n) (dt = 1)
    const int n = 4096;
    for (auto [y, k] : std::vector<std::pair<int, int>>{{32, 0}, {64, 32}, {96, -32}, {48, 16}}) {
        const double walk = rw_spike_probability({(n + k) / 2, (n - k) / 2, y});
        const double bridge = wiener_spike_probability(
            {static_cast<double>(y) / std::sqrt(n), static_cast<double>(k) / std::sqrt(n), 1.0});
        CHECK(std::abs(walk - bridge) < 0.01);
    }
}

TEST_CASE("bridge query construction from step quantities") {
    LifParams p;
    p.tau = 10e-3;
    p.dt = 1e-3;
    p.i_ext = 0.0;
    const double v_prev = 0.4, sigma_w = 0.01, net = 0.05;
    const std::int64_t n_spikes = 100;
    auto q = wiener_query_from_step(p, v_prev, 0.0, sigma_w, n_spikes, net);
    const double scale = sigma_w * std::sqrt(n_spikes / p.dt);
    CHECK(q.m == doctest::Approx((1.0 - p.alpha() * v_prev) / scale));
    CHECK(q.w_end == doctest::Approx(net / scale));
    CHECK(q.dt == p.dt);
    CHECK_THROWS(wiener_query_from_step(p, 0.4, 0.0, 0.0, 10, 0.0));
    CHECK_THROWS(wiener_query_from_step(p, 0.4, 0.0, 0.01, 0, 0.0));
}

TEST_CASE("permutation resolution agrees with the conditioned-walk law for +/-w weights") {
    // For equal-magnitude weights, a uniformly shuffled prefix-sum crossing is
    // exactly the conditioned random walk of Theorem form.
    auto rng = make_stream(1234, 0);
    const double w = 0.1, v_th = 1.0;
    const int N = 7, M = 6;  // endpoint v = 0.85 stays below threshold
    const double v_det = 0.75;  // needs ceil(0.25/0.1)=3 net up-steps
    const double expected = rw_spike_probability({N, M, rw_barrier(v_det, w, v_th)});
    const int trials = 200000;
    int hits = 0;
    std::vector<double> weights;
    for (int t = 0; t < trials; ++t) {
        weights.assign(N, w);
        weights.insert(weights.end(), M, -w);
        if (permutation_step(v_det, weights, v_th, rng)) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / trials;
    const double se = std::sqrt(expected * (1 - expected) / trials);
    CHECK(std::abs(p_hat - expected) < 4.0 * se);
}

TEST_CASE("permutation step end-of-interval crossing needs no shuffle") {
    auto rng = make_stream(1, 0);
    std::vector<double> weights{0.5, -0.1};
    CHECK(permutation_step(0.7, weights, 1.0, rng));  // net end value 1.1 >= 1
    std::vector<double> none{-0.1, -0.2};
    CHECK_FALSE(permutation_step(0.7, none, 1.0, rng));
}
