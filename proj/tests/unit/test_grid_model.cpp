#include <catch2/catch_amalgamated.hpp>

#include "sbsim/grid_model.hpp"
#include "support/synthetic.hpp"

using namespace sbsim;

namespace {

Grid2D<CellClass> grid_from(const std::vector<std::string>& art) {
  // '.' exterior air, 'a' interior air, 'w' interior wall, 'W' exterior wall
  Grid2D<CellClass> g(static_cast<int>(art.size()), static_cast<int>(art[0].size()),
                      CellClass::ExteriorAir);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      switch (art[r][c]) {
        case '.': g(r, c) = CellClass::ExteriorAir; break;
        case 'a': g(r, c) = CellClass::InteriorAir; break;
        case 'w': g(r, c) = CellClass::InteriorWall; break;
        case 'W': g(r, c) = CellClass::ExteriorWall; break;
        default: FAIL("bad art char");
      }
    }
  }
  return g;
}

FloorplanGrid plan_from(const std::vector<std::string>& art, double dx = 0.5, double z = 3.0) {
  FloorplanGrid p;
  p.cells = grid_from(art);
  p.width = p.cells.cols();
  p.height = p.cells.rows();
  p.cv_size_m = dx;
  p.floor_height_m = z;
  return p;
}

}  // namespace

TEST_CASE("classify_cvs basic edge labeling") {
  // Middle column cells adjacent to the exterior left column are left edges.
  FloorplanGrid p = plan_from({".aa", ".aa", ".aa"});
  const CVClassification cls = classify_cvs(p);
  CHECK(cls.kind(1, 1) == CvKind::BoundaryEdge);
  CHECK(cls.exterior_sides(1, 1) == (1u << DirLeft));
}

TEST_CASE("classify_cvs corner labeling") {
  FloorplanGrid p = plan_from({
      "....",
      ".aaa",
      ".aaa",
      ".aaa",
  });
  const CVClassification cls = classify_cvs(p);
  // Exterior above and to the left -> top-left corner.
  CHECK(cls.kind(1, 1) == CvKind::BoundaryCorner);
  CHECK(cls.exterior_sides(1, 1) == ((1u << DirLeft) | (1u << DirTop)));
  CHECK(cls.kind(2, 2) == CvKind::Interior);
}

TEST_CASE("classify_cvs matches brute-force neighbor scan on random grids") {
  Rng rng(42);
  for (int iter = 0; iter < 20; ++iter) {
    FloorplanGrid p;
    p.width = 12;
    p.height = 12;
    p.cv_size_m = 0.5;
    p.floor_height_m = 3.0;
    p.cells = Grid2D<CellClass>(12, 12, CellClass::ExteriorAir);
    for (int r = 1; r < 11; ++r) {
      for (int c = 1; c < 11; ++c) {
        p.cells(r, c) = static_cast<CellClass>(rng.uniform_int(0, 3));
      }
    }
    const CVClassification cls = classify_cvs(p);
    int exterior = 0, interior = 0, boundary = 0;
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 12; ++c) {
        // Independent scan.
        if (p.cells(r, c) == CellClass::ExteriorAir) {
          ++exterior;
          REQUIRE(cls.kind(r, c) == CvKind::Exterior);
          continue;
        }
        int ext_faces = 0;
        bool ext_left = false, ext_right = false, ext_up = false, ext_down = false;
        auto check = [&](int rr, int cc, bool& flag) {
          const CellClass nb =
              p.cells.in_bounds(rr, cc) ? p.cells(rr, cc) : CellClass::ExteriorAir;
          if (nb == CellClass::ExteriorAir) {
            flag = true;
            ++ext_faces;
          }
        };
        check(r, c - 1, ext_left);
        check(r, c + 1, ext_right);
        check(r - 1, c, ext_up);
        check(r + 1, c, ext_down);
        if (ext_faces == 0) {
          ++interior;
          REQUIRE(cls.kind(r, c) == CvKind::Interior);
        } else {
          ++boundary;
          REQUIRE(cls.is_boundary(r, c));
          if (ext_faces == 1) {
            REQUIRE(cls.kind(r, c) == CvKind::BoundaryEdge);
          } else if (ext_faces == 2 && !((ext_left && ext_right) || (ext_up && ext_down))) {
            REQUIRE(cls.kind(r, c) == CvKind::BoundaryCorner);
          }
        }
      }
    }
    CHECK(exterior + interior + boundary == 144);
  }
}

TEST_CASE("oriented conductivity and convection tensors") {
  FloorplanGrid p = plan_from({
      ".....",
      ".aaa.",
      ".aaa.",
      ".....",
  });
  MaterialParams m;
  m.convection_coefficient = 25.0;
  const CVClassification cls = classify_cvs(p);
  const OrientedFields f = build_oriented_fields(p, cls, m);

  SECTION("interior-facing faces carry conductivity, no convection") {
    CHECK(f.K[DirRight](1, 1) == MaterialParams::kAirConductivity);
    CHECK(f.H[DirRight](1, 1) == 0.0);
  }
  SECTION("exterior-facing faces carry convection, no conductivity") {
    CHECK(f.K[DirLeft](1, 1) == 0.0);
    CHECK(f.H[DirLeft](1, 1) == 25.0);
  }
  SECTION("corner CVs have quarter volume") {
    CHECK(f.U(1, 1) == 0.25);
    CHECK(f.V(1, 1) == 0.25);
    CHECK(f.cell_volume(1, 1) == Catch::Approx(0.25 * f.dx * f.dx * f.z));
  }
  SECTION("at most one of K_d and H_d is nonzero per face") {
    for (int r = 0; r < f.rows; ++r) {
      for (int c = 0; c < f.cols; ++c) {
        for (int d = 0; d < 4; ++d) {
          CHECK((f.K[d](r, c) == 0.0 || f.H[d](r, c) == 0.0));
        }
      }
    }
  }
}

TEST_CASE("negative material parameters are rejected") {
  MaterialParams m;
  m.exterior_cv_density = -1.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  MaterialParams m2;
  m2.swap_prob = 1.5;
  CHECK_THROWS_AS(m2.validate(), ValidationError);
}

TEST_CASE("oriented fields are symmetric under grid mirroring") {
  Rng rng(7);
  for (int iter = 0; iter < 10; ++iter) {
    FloorplanGrid p;
    p.width = 10;
    p.height = 8;
    p.cv_size_m = 0.5;
    p.floor_height_m = 3.0;
    p.cells = Grid2D<CellClass>(8, 10, CellClass::ExteriorAir);
    for (int r = 1; r < 7; ++r) {
      for (int c = 1; c < 9; ++c) p.cells(r, c) = static_cast<CellClass>(rng.uniform_int(0, 3));
    }
    FloorplanGrid mirrored = p;
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 10; ++c) mirrored.cells(r, c) = p.cells(r, 9 - c);
    }
    MaterialParams m;
    const OrientedFields a = build_oriented_fields(p, classify_cvs(p), m);
    const OrientedFields b = build_oriented_fields(mirrored, classify_cvs(mirrored), m);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 10; ++c) {
        REQUIRE(b.K[DirLeft](r, c) == a.K[DirRight](r, 9 - c));
        REQUIRE(b.K[DirRight](r, c) == a.K[DirLeft](r, 9 - c));
        REQUIRE(b.H[DirLeft](r, c) == a.H[DirRight](r, 9 - c));
        REQUIRE(b.H[DirRight](r, c) == a.H[DirLeft](r, 9 - c));
        REQUIRE(b.K[DirTop](r, c) == a.K[DirTop](r, 9 - c));
        REQUIRE(b.K[DirBottom](r, c) == a.K[DirBottom](r, 9 - c));
        REQUIRE(b.U(r, c) == a.U(r, 9 - c));
        REQUIRE(b.V(r, c) == a.V(r, 9 - c));
      }
    }
  }
}

TEST_CASE("CV volumes sum to the interior footprint") {
  // Non-exterior block spanning rows 1..6, cols 1..10 of an 8x12 lattice:
  // boundary CVs are halved so the volume sum equals the area of the
  // rectangle through the boundary CV centers.
  FloorplanGrid p;
  p.width = 12;
  p.height = 8;
  p.cv_size_m = 0.5;
  p.floor_height_m = 3.0;
  p.cells = Grid2D<CellClass>(8, 12, CellClass::ExteriorAir);
  for (int r = 1; r < 7; ++r) {
    for (int c = 1; c < 11; ++c) {
      const bool band = r == 1 || r == 6 || c == 1 || c == 10;
      p.cells(r, c) = band ? CellClass::ExteriorWall : CellClass::InteriorAir;
    }
  }
  const OrientedFields f = build_oriented_fields(p, classify_cvs(p), MaterialParams{});
  double sum = 0.0;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 12; ++c) {
      if (!f.exterior(r, c)) sum += f.cell_volume(r, c);
    }
  }
  const double rows_span = (6 - 1) * p.cv_size_m;  // between boundary centers
  const double cols_span = (10 - 1) * p.cv_size_m;
  CHECK(sum == Catch::Approx(rows_span * cols_span * p.floor_height_m).epsilon(1e-9));
}

TEST_CASE("zone map rejects overlap and wall cells") {
  testsupport::SyntheticSpec spec;
  BuildingConfig b = testsupport::make_building(spec);
  CHECK_NOTHROW(b.zone_map());

  BuildingConfig overlap = b;
  overlap.zones.push_back(overlap.zones[0]);
  overlap.zones.back().id = "dup";
  CHECK_THROWS_AS(overlap.zone_map(), ValidationError);

  BuildingConfig on_wall = b;
  on_wall.zones[0].cells.push_back({1, 1});  // exterior wall band
  CHECK_THROWS_AS(on_wall.zone_map(), ValidationError);
}

TEST_CASE("device layout rejects duplicate action fields and bad diffusers") {
  std::vector<DeviceInfo> devices(2);
  devices[0].id = "a";
  devices[0].action_fields = {"x/setpoint"};
  devices[1].id = "b";
  devices[1].action_fields = {"x/setpoint"};
  CHECK_THROWS_AS(DeviceLayout(devices), ValidationError);

  testsupport::SyntheticSpec spec;
  BuildingConfig b = testsupport::make_building(spec);
  b.devices[0].diffusers[0] = {1, 1};  // exterior wall cell
  CHECK_THROWS_AS(b.validate(), ValidationError);
}
