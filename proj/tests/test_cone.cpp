#include <doctest.h>

#include "semistable/cone.hpp"
#include "semistable/errors.hpp"
#include "test_util.hpp"

using namespace semistable;
using testutil::rvec;
using testutil::vec;

namespace {

Cone quadrant() { return Cone::make(2, {vec({1, 0}), vec({0, 1})}); }

Cone square_cone() {
    return Cone::make(3, {vec({1, 0, 0}), vec({0, 1, 0}), vec({1, 0, 1}), vec({0, 1, 1})});
}

// The index-two fixture cone in the chart basis (e1,e2,e3,w),
// w = (1/2,1/2,1/2,1/2).
Cone cone_8_2() {
    return Cone::make(4, {vec({1, 0, 0, 0}), vec({0, 1, 0, 0}), vec({0, 0, 1, 0}),
                          vec({-1, -1, -1, 2})});
}

}  // namespace

TEST_CASE("make_cone canonicalization") {
    Cone c = Cone::make(2, {vec({1, 0}), vec({0, 1}), vec({1, 1})});
    CHECK(c.rays() == std::vector<IntVec>{vec({0, 1}), vec({1, 0})});
    CHECK(Cone::make(1, {vec({2})}).rays() == std::vector<IntVec>{vec({1})});
    CHECK_THROWS_AS(Cone::make(2, {vec({1, 0}), vec({-1, 0})}), NotStrictlyConvex);
    CHECK_THROWS_AS(Cone::make(2, {vec({1, 0})}), RankMismatch);
    // Canonical form is a fixed point.
    Cone again = Cone::make(c.dim(), c.rays());
    CHECK(again == c);
}

TEST_CASE("faces") {
    CHECK(faces(quadrant()).size() == 4);
    CHECK(faces(Cone::make(1, {vec({1})})).size() == 2);
    // Cone over a square: 1 + 4 + 4 + 1 faces.
    auto fs = faces(square_cone());
    CHECK(fs.size() == 10);
    std::size_t count[4] = {0, 0, 0, 0};
    for (const auto& f : fs) ++count[f.dim];
    CHECK(count[0] == 1);
    CHECK(count[1] == 4);
    CHECK(count[2] == 4);
    CHECK(count[3] == 1);
}

TEST_CASE("face supporting covectors are exact") {
    for (const Cone& c : {quadrant(), square_cone(), cone_8_2()}) {
        for (const auto& f : faces(c)) {
            for (std::size_t i = 0; i < c.rays().size(); ++i) {
                bool in_face = std::find(f.ray_indices.begin(), f.ray_indices.end(), i) !=
                               f.ray_indices.end();
                Int pairing = dot(f.supporting, c.rays()[i]);
                CHECK(pairing >= 0);
                CHECK((pairing == 0) == (in_face || f.ray_indices.size() == c.rays().size()));
            }
        }
        // Closure under intersection: the common rays of two faces are a face.
        auto fs = faces(c);
        for (const auto& a : fs)
            for (const auto& b : fs) {
                std::vector<std::size_t> common;
                std::set_intersection(a.ray_indices.begin(), a.ray_indices.end(),
                                      b.ray_indices.begin(), b.ray_indices.end(),
                                      std::back_inserter(common));
                bool found = false;
                for (const auto& f : fs)
                    if (f.ray_indices == common) {
                        found = true;
                        break;
                    }
                CHECK(found);
            }
    }
}

TEST_CASE("contains") {
    Cone q = quadrant();
    CHECK(contains(q, rvec({"1", "1"})).location == Location::Interior);
    auto b = contains(q, rvec({"1", "0"}));
    REQUIRE(b.location == Location::Boundary);
    REQUIRE(b.face.has_value());
    CHECK(b.face->dim == 1);
    CHECK(q.rays()[b.face->ray_indices[0]] == vec({1, 0}));
    CHECK(contains(q, rvec({"-1", "2"})).location == Location::Outside);
}

TEST_CASE("multiplicity and nonsingularity") {
    CHECK(multiplicity(Cone::make(2, {vec({1, 0}), vec({1, 2})})) == 2);
    CHECK(multiplicity(quadrant()) == 1);
    CHECK(multiplicity(cone_8_2()) == 2);  // the fixture cone has index 2
    CHECK_THROWS_AS(multiplicity(square_cone()), NotSimplicial);
    CHECK(is_nonsingular(quadrant()));
    CHECK(!is_nonsingular(Cone::make(2, {vec({1, 0}), vec({1, 2})})));
    CHECK(!is_nonsingular(square_cone()));
}

TEST_CASE("multiplicity is invariant under unimodular chart change") {
    testutil::Rng rng(555);
    for (int iter = 0; iter < 30; ++iter) {
        // Random simplicial cone.
        std::size_t n = 2 + rng.pick(0, 1);
        IntMat m = testutil::random_matrix(rng, n, n, -3, 3);
        if (determinant(m) == 0) continue;
        std::vector<IntVec> rays;
        for (std::size_t c = 0; c < n; ++c) rays.push_back(primitive_vector(m.column(c)));
        Cone cone = Cone::make(n, rays);
        if (!cone.is_simplicial()) continue;
        // Random unimodular map: product of elementary operations.
        IntMat u = IntMat::identity(n);
        for (int k = 0; k < 6; ++k) {
            std::size_t i = rng.pick(0, n - 1), j = rng.pick(0, n - 1);
            if (i == j) continue;
            Int factor = rng.pick(-2, 2);
            for (std::size_t r = 0; r < n; ++r) u.at(r, i) += factor * u.at(r, j);
        }
        std::vector<IntVec> moved;
        for (const auto& r : cone.rays()) moved.push_back(mat_apply(u, r));
        Cone changed = Cone::make(n, moved);
        CHECK(multiplicity(changed) == multiplicity(cone));
    }
}

TEST_CASE("gorenstein functional") {
    {
        auto g = gorenstein_functional(quadrant());
        REQUIRE(g.has_value());
        CHECK(*g == vec({-1, -1}));
    }
    {
        // Forces a non-integral coefficient; exhaustive small search agrees.
        Cone c = Cone::make(2, {vec({1, 0}), vec({2, 3})});
        CHECK(!gorenstein_functional(c).has_value());
        for (long a = -4; a <= 4; ++a)
            for (long b = -4; b <= 4; ++b) {
                bool all = true;
                for (const auto& r : c.rays())
                    if (dot(vec({a, b}), r) != -1) {
                        all = false;
                        break;
                    }
                CHECK(!all);
            }
    }
    {
        Cone sq = square_cone();
        auto g = gorenstein_functional(sq);
        REQUIRE(g.has_value());
        CHECK(*g == vec({-1, -1, 0}));
        for (const auto& r : sq.rays()) CHECK(dot(*g, r) == -1);
    }
}
