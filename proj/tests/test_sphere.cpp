#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lerw/sphere.hpp"

using namespace lerw;

TEST_CASE("circle arcs") {
    auto cells = sphere_partition(2, 8);
    REQUIRE(cells.size() == 8);
    for (const auto& c : cells) CHECK(c.area == doctest::Approx(1.0 / 8).epsilon(1e-15));
    // assignment walks the circle in order
    for (int k = 0; k < 8; ++k) {
        double phi = 2 * M_PI * (k + 0.5) / 8;
        Vec d{std::cos(phi), std::sin(phi)};
        CHECK(cell_of(cells, 2, d) == k);
    }
    // boundary direction resolves to the first matching (half-open) arc
    CHECK(cell_of(cells, 2, Vec{1, 0}) == 0);
}

TEST_CASE("octants") {
    auto cells = sphere_partition(3, 8);
    REQUIRE(cells.size() == 8);
    double total = 0;
    for (const auto& c : cells) {
        CHECK(c.area == doctest::Approx(1.0 / 8).epsilon(1e-15));
        total += c.area;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // one point per octant, all distinct cells
    bool used[8] = {};
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (double sz : {-1.0, 1.0}) {
                int i = cell_of(cells, 3, Vec{sx, sy, sz});
                CHECK(!used[i]);
                used[i] = true;
            }
    // poles are covered
    CHECK_NOTHROW(cell_of(cells, 3, Vec{0, 0, 1}));
    CHECK_NOTHROW(cell_of(cells, 3, Vec{0, 0, -1}));
}

TEST_CASE("general partitions") {
    RngStream rng(41, 0);
    for (int D : {4, 5, 13, 37, 64, 100, 200}) {
        auto cells = sphere_partition(3, D);  // bounds asserted in the constructor
        double total = 0;
        for (const auto& c : cells) {
            total += c.area;
            CHECK(c.area >= 1.0 / (4.0 * D) - 1e-12);
            CHECK(c.area <= 4.0 / D + 1e-12);
            CHECK(c.diam <= 8.0 / std::sqrt(static_cast<double>(D)) + 1e-9);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        // every direction lands in exactly one cell; in-cell samples come back
        for (int t = 0; t < 200; ++t) {
            Vec u = sample_sphere(3, rng);
            CHECK_NOTHROW(cell_of(cells, 3, u));
        }
        for (std::size_t i = 0; i < cells.size(); ++i)
            for (int t = 0; t < 20; ++t) {
                Vec p = sample_in_cell(cells[i], 3, rng);
                CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(cell_of(cells, 3, p) == static_cast<int>(i));
            }
    }
    CHECK_THROWS(sphere_partition(3, 3));
    CHECK_THROWS(sphere_partition(4, 8));
}

TEST_CASE("uniform sampling matches cell areas") {
    RngStream rng(42, 0);
    auto cells = sphere_partition(3, 13);
    std::vector<int> cnt(cells.size(), 0);
    const int N = 50'000;
    for (int t = 0; t < N; ++t) ++cnt[cell_of(cells, 3, sample_sphere(3, rng))];
    for (std::size_t i = 0; i < cells.size(); ++i) {
        double p = cells[i].area;
        double sd = std::sqrt(p * (1 - p) / N);
        CHECK(std::abs(static_cast<double>(cnt[i]) / N - p) < 4 * sd);
    }
}
