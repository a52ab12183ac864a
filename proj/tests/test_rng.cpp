#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "maplab/mc.hpp"
#include "maplab/rng.hpp"

using namespace maplab;

TEST_CASE("streams are deterministic in the seed and stream index") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::vector<uint64_t> va, vb;
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 64; ++i) {
        uint64_t x = a();
        va.push_back(x);
        vb.push_back(b());
        if (x != c()) differs_c = true;
        if (x != d()) differs_d = true;
    }
    REQUIRE(va == vb);
    REQUIRE(differs_c);
    REQUIRE(differs_d);
}

TEST_CASE("uniform stays in the open unit interval") {
    RngStream r(1, 0);
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("exponential and normal moments match") {
    RngStream r(3, 1);
    double se = 0.0, sn = 0.0, sn2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        se += r.exponential(2.0);
        double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    REQUIRE(se / n == Catch::Approx(0.5).margin(0.01));
    REQUIRE(sn / n == Catch::Approx(0.0).margin(0.01));
    REQUIRE(sn2 / n == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("categorical respects the weights") {
    RngStream r(9, 2);
    std::vector<double> w{0.2, 0.5, 0.3};
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[r.categorical(w)];
    REQUIRE(counts[0] / double(n) == Catch::Approx(0.2).margin(0.01));
    REQUIRE(counts[1] / double(n) == Catch::Approx(0.5).margin(0.01));
    REQUIRE(counts[2] / double(n) == Catch::Approx(0.3).margin(0.01));
}

TEST_CASE("replicated runs are independent of worker count") {
    SeedPlan plan{12345, 64};
    auto task = [](RngStream& rng, std::size_t idx) {
        double s = 0.0;
        for (std::size_t i = 0; i <= idx % 8; ++i) s += rng.uniform();
        return s;
    };
    auto one = run_replicated(task, plan, 1);
    auto four = run_replicated(task, plan, 4);
    REQUIRE(one == four);
    std::set<double> uniq(one.begin(), one.end());
    REQUIRE(uniq.size() > 32);
}

TEST_CASE("replicate failures carry the index") {
    SeedPlan plan{1, 8};
    auto task = [](RngStream&, std::size_t idx) -> int {
        if (idx == 5) throw std::runtime_error("boom");
        return 0;
    };
    REQUIRE_THROWS_WITH((run_replicated(task, plan, 2)),
                        Catch::Matchers::ContainsSubstring("replicate 5"));
}
