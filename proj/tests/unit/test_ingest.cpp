#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "sbsim/ingest.hpp"

using namespace sbsim;

namespace {

RasterImage image_of(int h, int w, double fill) {
  RasterImage img;
  img.pixels = Grid2D<double>(h, w, fill);
  return img;
}

void fill_rect(BitGrid& g, int r0, int c0, int r1, int c1, std::uint8_t v) {
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) g(r, c) = v;
  }
}

// Reference morphology written over pixel sets rather than grids.
std::set<std::pair<int, int>> set_erode(const std::set<std::pair<int, int>>& s, int rows, int cols) {
  std::set<std::pair<int, int>> out;
  for (const auto& [r, c] : s) {
    bool all = true;
    for (int dr = -1; dr <= 1 && all; ++dr) {
      for (int dc = -1; dc <= 1 && all; ++dc) {
        const int nr = r + dr, nc = c + dc;
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols || !s.count({nr, nc})) all = false;
      }
    }
    if (all) out.insert({r, c});
  }
  return out;
}

std::set<std::pair<int, int>> set_dilate(const std::set<std::pair<int, int>>& s, int rows, int cols) {
  std::set<std::pair<int, int>> out;
  for (const auto& [r, c] : s) {
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int nr = r + dr, nc = c + dc;
        if (nr >= 0 && nr < rows && nc >= 0 && nc < cols) out.insert({nr, nc});
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("binarize thresholds pixel intensities") {
  SECTION("all-white image is all background") {
    const BitGrid g = binarize(image_of(4, 5, 1.0), 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(g[i] == 0);
  }
  SECTION("all-black image is all wall") {
    const BitGrid g = binarize(image_of(4, 5, 0.0), 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(g[i] == 1);
  }
  SECTION("checkerboard matches the per-pixel oracle") {
    RasterImage img = image_of(6, 6, 0.0);
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) img.pixels(r, c) = (r + c) % 2 ? 0.9 : 0.1;
    }
    const BitGrid g = binarize(img, 0.5);
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) REQUIRE(g(r, c) == (img.pixels(r, c) < 0.5 ? 1 : 0));
    }
  }
}

TEST_CASE("denoise removes specks and keeps thick walls") {
  SECTION("single isolated pixel is removed") {
    BitGrid g(9, 9, 0);
    g(4, 4) = 1;
    const BitGrid out = denoise(g, 1);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == 0);
  }
  SECTION("solid block is preserved") {
    BitGrid g(14, 14, 0);
    fill_rect(g, 2, 2, 11, 11, 1);
    const BitGrid out = denoise(g, 1);
    CHECK(out == g);
  }
  SECTION("salt noise on a clean plan matches the set-based morphology oracle") {
    BitGrid g(24, 24, 0);
    fill_rect(g, 4, 4, 19, 6, 1);   // vertical wall, 3 px thick
    fill_rect(g, 4, 4, 6, 19, 1);   // horizontal wall, 3 px thick
    Rng rng(77);
    for (int i = 0; i < 25; ++i) {
      g(static_cast<int>(rng.uniform_int(0, 23)), static_cast<int>(rng.uniform_int(0, 23))) |= 0;
      const int r = static_cast<int>(rng.uniform_int(0, 23));
      const int c = static_cast<int>(rng.uniform_int(0, 23));
      if (g(r, c) == 0 && (r > 9 || c > 9)) g(r, c) = 1;  // isolated-ish specks
    }
    std::set<std::pair<int, int>> pixels;
    for (int r = 0; r < 24; ++r) {
      for (int c = 0; c < 24; ++c) {
        if (g(r, c)) pixels.insert({r, c});
      }
    }
    const BitGrid out = denoise(g, 2);
    auto expect = pixels;
    for (int i = 0; i < 2; ++i) expect = set_dilate(set_erode(expect, 24, 24), 24, 24);
    for (int r = 0; r < 24; ++r) {
      for (int c = 0; c < 24; ++c) {
        REQUIRE(static_cast<bool>(out(r, c)) == static_cast<bool>(expect.count({r, c})));
      }
    }
  }
}

TEST_CASE("downsample is block-max pooling") {
  SECTION("uniform grid stays uniform") {
    BitGrid g(8, 8, 1);
    const BitGrid out = downsample(g, 2);
    CHECK(out.rows() == 4);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == 1);
  }
  SECTION("one wall pixel per block makes every cell wall") {
    BitGrid g(8, 8, 0);
    for (int br = 0; br < 4; ++br) {
      for (int bc = 0; bc < 4; ++bc) g(br * 2 + 1, bc * 2) = 1;
    }
    const BitGrid out = downsample(g, 2);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == 1);
  }
  SECTION("random grid matches the loop oracle") {
    Rng rng(5);
    BitGrid g(13, 10, 0);  // non-divisible shape exercises partial blocks
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.bernoulli(0.3) ? 1 : 0;
    const BitGrid out = downsample(g, 3);
    REQUIRE(out.rows() == 5);
    REQUIRE(out.cols() == 4);
    for (int br = 0; br < 5; ++br) {
      for (int bc = 0; bc < 4; ++bc) {
        std::uint8_t expect = 0;
        for (int r = br * 3; r < std::min(13, br * 3 + 3); ++r) {
          for (int c = bc * 3; c < std::min(10, bc * 3 + 3); ++c) expect |= g(r, c);
        }
        REQUIRE(out(br, bc) == expect);
      }
    }
  }
}

TEST_CASE("mark_exterior separates border-connected background") {
  SECTION("empty grid is all exterior") {
    const auto out = mark_exterior(BitGrid(6, 6, 0));
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == CellClass::ExteriorAir);
  }
  SECTION("closed rectangle encloses interior air") {
    BitGrid g(10, 10, 0);
    fill_rect(g, 2, 2, 7, 7, 1);
    fill_rect(g, 3, 3, 6, 6, 0);
    const auto out = mark_exterior(g);
    CHECK(out(4, 4) == CellClass::InteriorAir);
    CHECK(out(0, 0) == CellClass::ExteriorAir);
    CHECK(out(2, 2) == CellClass::InteriorWall);
  }
  SECTION("courtyard is exterior only when connected to the border") {
    BitGrid enclosed(12, 12, 0);
    fill_rect(enclosed, 2, 2, 9, 9, 1);
    fill_rect(enclosed, 4, 4, 7, 7, 0);  // walled courtyard inside a solid block
    const auto a = mark_exterior(enclosed);
    CHECK(a(5, 5) == CellClass::InteriorAir);

    BitGrid open = enclosed;
    fill_rect(open, 5, 2, 6, 3, 0);  // channel to the border
    fill_rect(open, 5, 4, 6, 4, 0);
    const auto b = mark_exterior(open);
    CHECK(b(5, 5) == CellClass::ExteriorAir);
  }
}

namespace {

// 30x30 plan: 4-px exterior wall, one 4-px interior partition -> two rooms.
Grid2D<CellClass> thick_plan() {
  BitGrid g(30, 30, 0);
  fill_rect(g, 3, 3, 26, 26, 1);
  fill_rect(g, 7, 7, 22, 22, 0);
  fill_rect(g, 7, 14, 22, 17, 1);  // partition
  return mark_exterior(g);
}

int run_length_across(const Grid2D<CellClass>& g, int row, int col_from, int col_to, CellClass what) {
  int best = 0, cur = 0;
  for (int c = col_from; c <= col_to; ++c) {
    cur = g(row, c) == what ? cur + 1 : 0;
    best = std::max(best, cur);
  }
  return best;
}

}  // namespace

TEST_CASE("thin_walls reduces interior walls to one CV and exterior to two") {
  const Grid2D<CellClass> plan = thick_plan();
  REQUIRE(count_rooms(plan) == 2);
  const Grid2D<CellClass> out = thin_walls(plan);

  CHECK(count_rooms(out) == 2);
  // Mid-height cut: partition must be exactly 1 interior-wall CV, each
  // exterior band exactly 2 exterior-wall CVs.
  const int mid = 15;
  CHECK(run_length_across(out, mid, 8, 21, CellClass::InteriorWall) == 1);
  CHECK(run_length_across(out, mid, 0, 7, CellClass::ExteriorWall) == 2);
  CHECK(run_length_across(out, mid, 22, 29, CellClass::ExteriorWall) == 2);
  // No stray interior-wall cells hugging the exterior band.
  for (int r = 0; r < 30; ++r) {
    CHECK(out(r, 3) != CellClass::InteriorWall);
  }
}

TEST_CASE("thin_walls preserves L-shaped wall connectivity") {
  BitGrid g(20, 20, 0);
  fill_rect(g, 4, 4, 15, 6, 1);   // vertical leg
  fill_rect(g, 13, 4, 15, 15, 1); // horizontal leg
  const auto marked = mark_exterior(g);
  const auto out = thin_walls(marked);
  // One 8-connected wall component before and after.
  auto components = [](const Grid2D<CellClass>& grid) {
    Grid2D<std::uint8_t> seen(grid.rows(), grid.cols(), 0);
    int count = 0;
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) {
        if (!is_wall(grid(r, c)) || seen(r, c)) continue;
        ++count;
        std::vector<Cell> stack{{r, c}};
        seen(r, c) = 1;
        while (!stack.empty()) {
          const Cell cur = stack.back();
          stack.pop_back();
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              const int nr = cur.row + dr, nc = cur.col + dc;
              if (nr < 0 || nr >= grid.rows() || nc < 0 || nc >= grid.cols()) continue;
              if (!is_wall(grid(nr, nc)) || seen(nr, nc)) continue;
              seen(nr, nc) = 1;
              stack.push_back({nr, nc});
            }
          }
        }
      }
    }
    return count;
  };
  CHECK(components(marked) == 1);
  CHECK(components(out) == 1);
}

TEST_CASE("thin_walls is idempotent") {
  const Grid2D<CellClass> once = thin_walls(thick_plan());
  const Grid2D<CellClass> twice = thin_walls(once);
  CHECK(once == twice);
}

TEST_CASE("thin_walls preserves room count on random plans") {
  Rng rng(404);
  for (int trial = 0; trial < 5; ++trial) {
    BitGrid g(26, 26, 0);
    fill_rect(g, 2, 2, 23, 23, 1);
    fill_rect(g, 5, 5, 20, 20, 0);
    // Random partitions.
    for (int p = 0; p < 2; ++p) {
      const int c = static_cast<int>(rng.uniform_int(8, 17));
      fill_rect(g, 5, c, 20, c + 2, 1);
    }
    const auto marked = mark_exterior(g);
    const auto out = thin_walls(marked);
    REQUIRE(count_rooms(out) == count_rooms(marked));
  }
}

TEST_CASE("place_devices maps anchors to rooms") {
  const Grid2D<CellClass> plan = thin_walls(thick_plan());

  SECTION("anchor in a closed room claims that room's cells") {
    const std::vector<Cell> cells = room_cells(plan, {10, 10});
    CHECK(!cells.empty());
    for (const Cell& c : cells) REQUIRE(plan(c.row, c.col) == CellClass::InteriorAir);
  }
  SECTION("two anchors in one room map to the same cell set") {
    CHECK(room_cells(plan, {10, 10}) == room_cells(plan, {12, 9}));
  }
  SECTION("anchor on a wall is a placement error") {
    CHECK_THROWS_AS(room_cells(plan, {15, 4}), ValidationError);
  }
  SECTION("anchor on exterior is a placement error") {
    CHECK_THROWS_AS(room_cells(plan, {0, 0}), ValidationError);
  }
}

TEST_CASE("full ingest pipeline produces a valid building") {
  // 120x120 synthetic plan at 0.25 m/px with 2 rooms and device anchors.
  RasterImage img = image_of(120, 120, 1.0);
  auto paint = [&](int r0, int c0, int r1, int c1, double v) {
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) img.pixels(r, c) = v;
    }
  };
  paint(10, 10, 109, 109, 0.0);
  paint(18, 18, 101, 101, 1.0);
  paint(18, 56, 101, 63, 0.0);  // partition

  PlacementFile placement;
  DevicePlacement vav1;
  vav1.id = "vav_left";
  vav1.type = DeviceType::VAV;
  vav1.anchor_pixel = Cell{40, 30};
  vav1.params = json::object();
  placement.devices.push_back(vav1);
  DevicePlacement vav2;
  vav2.id = "vav_right";
  vav2.type = DeviceType::VAV;
  vav2.anchor_pixel = Cell{40, 90};
  vav2.params = json::object();
  placement.devices.push_back(vav2);
  DevicePlacement ahu;
  ahu.id = "ahu";
  ahu.type = DeviceType::AHU;
  ahu.params = json::object();
  placement.devices.push_back(ahu);
  DevicePlacement boiler;
  boiler.id = "boiler";
  boiler.type = DeviceType::Boiler;
  boiler.params = json::object();
  placement.devices.push_back(boiler);

  IngestOptions opts;
  opts.scale_m_per_pixel = 0.25;
  opts.cv_size_m = 0.5;
  const BuildingConfig b = ingest_floorplan(img, opts, {}, placement);
  CHECK(b.zones.size() == 2);
  CHECK(b.devices.size() == 4);
  CHECK(b.floor_grids[0].rows() == 62);  // 120/2 + exterior padding ring
  CHECK_NOTHROW(b.validate());
  // Zones are disjoint rooms.
  CHECK(b.zones[0].cells != b.zones[1].cells);
}

TEST_CASE("erase_features clears masked rectangles") {
  BitGrid g(10, 10, 0);
  fill_rect(g, 2, 2, 7, 7, 1);
  const BitGrid out = erase_features(g, {{3, 3, 5, 5}, {0, 0, 1, 9}});
  for (int r = 3; r <= 5; ++r) {
    for (int c = 3; c <= 5; ++c) REQUIRE(out(r, c) == 0);
  }
  CHECK(out(2, 2) == 1);
  CHECK(out(6, 6) == 1);
  CHECK(out(7, 2) == 1);
}
