#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

#include "maplab/analysis.hpp"
#include "maplab/fixtures.hpp"
#include "maplab/serialize.hpp"

using namespace maplab;

namespace {

// Round-trip a spec through JSON and confirm the matrix exponent agrees on a
// small grid, which exercises every model ingredient.
void check_round_trip(const MapSpec& spec) {
    json j = to_json(spec);
    MapSpec back = map_spec_from_json(j);
    REQUIRE(back.num_states() == spec.num_states());
    for (double v : {-1.0, -0.3, 0.0, 0.7, 1.5}) {
        std::complex<double> z(0.0, v);
        auto fa = matrix_exponent(spec, z);
        auto fb = matrix_exponent(back, z);
        for (Eigen::Index r = 0; r < fa.rows(); ++r)
            for (Eigen::Index c = 0; c < fa.cols(); ++c)
                REQUIRE(std::abs(fa(r, c) - fb(r, c)) <= 1e-12);
    }
}

}  // namespace

TEST_CASE("every fixture round-trips through JSON") {
    check_round_trip(fixtures::deterministic_drift());
    check_round_trip(fixtures::exp_jump_drift());
    check_round_trip(fixtures::brownian_two_state());
    check_round_trip(fixtures::exp_oscillating());
    check_round_trip(fixtures::pareto_oscillating());
    check_round_trip(fixtures::exp_drift_down());
}

TEST_CASE("load_map_spec reads a file, with or without a model wrapper") {
    auto spec = fixtures::exp_jump_drift();
    const std::string bare = "/tmp/maplab_spec_bare.json";
    const std::string wrapped = "/tmp/maplab_spec_wrapped.json";
    {
        std::ofstream out(bare);
        out << to_json(spec).dump(2);
    }
    {
        std::ofstream out(wrapped);
        json j;
        j["model"] = to_json(spec);
        j["seed"] = 42;
        out << j.dump(2);
    }
    REQUIRE(load_map_spec(bare).num_states() == 2);
    REQUIRE(load_map_spec(wrapped).num_states() == 2);
    REQUIRE_THROWS_AS(load_map_spec("/tmp/does_not_exist.json"), std::runtime_error);
    std::remove(bare.c_str());
    std::remove(wrapped.c_str());
}

TEST_CASE("csv formatting keeps full double precision") {
    REQUIRE(std::stod(csv_format(1.0 / 3.0)) == 1.0 / 3.0);
    REQUIRE(csv_format(2.0) == "2");
    REQUIRE(std::stod(csv_format(1e-300)) == 1e-300);
}

TEST_CASE("csv writer emits header and rows, and rejects ragged rows") {
    const std::string path = "/tmp/maplab_csv_test.csv";
    {
        CsvWriter w(path, {"a", "b"});
        w.row({1.0, 0.5});
        REQUIRE_THROWS_AS(w.row({1.0}), std::invalid_argument);
    }
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "a,b");
    std::getline(in, line);
    REQUIRE(line == "1,0.5");
    std::remove(path.c_str());
}
