#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "lptem/csv.hpp"
#include "lptem/dataset.hpp"
#include "lptem/pgm.hpp"

using namespace lptem;
namespace fs = std::filesystem;

namespace {

Image16 random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
    Image16 img(w, h);
    std::uniform_int_distribution<int> v(0, 65535);
    for (auto& p : img.pixels()) p = static_cast<std::uint16_t>(v(rng));
    return img;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lptem_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST(Pgm, RoundTripIsBitExact) {
    std::mt19937_64 rng(1);
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 3}, {64, 64}, {333, 17}}) {
        const Image16 img = random_image(rng, w, h);
        const std::string bytes = pgm::encode(img);
        std::istringstream is(bytes);
        const Image16 back = pgm::read(is);
        EXPECT_EQ(back, img);
        EXPECT_EQ(pgm::encode(back), bytes);
    }
}

TEST(Pgm, BigEndianLayout) {
    Image16 img(2, 1);
    img(0, 0) = 0x0102;
    img(1, 0) = 0xfffe;
    const std::string bytes = pgm::encode(img);
    const std::string header = "P5\n2 1\n65535\n";
    ASSERT_EQ(bytes.size(), header.size() + 4);
    EXPECT_EQ(bytes.substr(0, header.size()), header);
    EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 0x01);
    EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 1]), 0x02);
    EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 2]), 0xff);
}

TEST(Pgm, ReadsCommentsAndEightBit) {
    std::string data = "P5\n# made by hand\n3 1\n# another\n255\n";
    data += std::string("\x00\x7f\xff", 3);
    std::istringstream is(data);
    const Image16 img = pgm::read(is);
    EXPECT_EQ(img(0, 0), 0);
    EXPECT_EQ(img(1, 0), 127);
    EXPECT_EQ(img(2, 0), 255);
}

TEST(Pgm, RejectsMalformedInput) {
    auto bad = [](const std::string& s) {
        std::istringstream is(s);
        EXPECT_THROW(pgm::read(is), IoError) << s;
    };
    bad("");
    bad("P2\n1 1\n255\n0");
    bad("P5\n2 2\n65535\n\x01\x02");
    bad("P5\n-1 2\n255\n");
    bad("P5\n2 2\n70000\n");
    bad("P5\n2");
}

TEST(Pgm, FileErrorsNameThePath) {
    const fs::path dir = scratch("pgm_err");
    const fs::path p = dir / "mask_00003.pgm";
    write_atomic(p, "P5\n4 4\n65535\n\x00");
    try {
        pgm::read_file(p);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("mask_00003.pgm"), std::string::npos);
    }
    fs::remove_all(dir);
}

TEST(Csv, GroundTruthRoundTrip) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(100.0, 40.0);
    std::vector<Trajectory> trajs(3);
    for (int id = 0; id < 3; ++id) {
        trajs[id].id = id + 1;
        trajs[id].frame_interval = 0.5;
        for (int f = 0; f < 20; ++f)
            if (f % (id + 2) != 1)
                trajs[id].samples.push_back({f, n(rng), n(rng), id == 2 ? std::nullopt : std::optional(n(rng) * 1e-3)});
    }
    std::ostringstream os;
    csv::write_ground_truth(os, trajs);
    std::istringstream is(os.str());
    const auto table = csv::read(is);
    EXPECT_TRUE(table.has_nm);
    EXPECT_FALSE(table.has_px);
    EXPECT_EQ(csv::to_trajectories(table, csv::Units::nm, 0.5), trajs);
}

TEST(Csv, TracksHeaderAndUnits) {
    Track t;
    t.id = 4;
    t.detections.push_back({2, 1, 10.0, 20.0, 0.5, 77});
    const std::vector<Track> tracks{t};
    std::ostringstream a, b;
    csv::write_tracks(a, tracks, std::nullopt);
    csv::write_tracks(b, tracks, 0.25);
    EXPECT_EQ(a.str(), "frame,id,x_px,y_px,theta_rad,area_px\n2,4,10,20,0.5,77\n");
    EXPECT_EQ(b.str(), "frame,id,x_px,y_px,x_nm,y_nm,theta_rad,area_px\n2,4,10,20,2.625,5.125,0.5,77\n");
    std::istringstream is(b.str());
    const auto table = csv::read(is);
    const auto px = csv::to_trajectories(table, csv::Units::px, 1.0);
    EXPECT_EQ(px[0].samples[0].x, 10.0);
    const auto nm = csv::to_trajectories(table, csv::Units::nm, 1.0);
    EXPECT_EQ(nm[0].samples[0].y, 5.125);
}

TEST(Csv, ParseErrors) {
    auto bad = [](const std::string& s) {
        std::istringstream is(s);
        EXPECT_THROW(csv::to_trajectories(csv::read(is), csv::Units::nm, 1.0), IoError) << s;
    };
    bad("");
    bad("id,x_nm,y_nm\n1,2,3\n");
    bad("frame,id,x_px,y_px\n0,1,2,3\n");
    bad("frame,id,x_nm,y_nm\n0,1,2\n");
    bad("frame,id,x_nm,y_nm\n0,1,abc,3\n");
    bad("frame,id,x_nm,y_nm\n0,1,2,3\n0,1,2,3\n");
    bad("frame,id,x_nm,y_nm\n0,1,,3\n");
}

TEST(Csv, ColumnOrderAndBlankLines) {
    std::istringstream is("y_nm,x_nm,id,frame\n\n2,1,7,3\n");
    const auto t = csv::to_trajectories(csv::read(is), csv::Units::nm, 1.0);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].id, 7);
    EXPECT_EQ(t[0].samples[0].frame, 3);
    EXPECT_EQ(t[0].samples[0].x, 1.0);
    EXPECT_EQ(t[0].samples[0].y, 2.0);
}

TEST(Dataset, WriteReadAndDeterminism) {
    RunConfig cfg;
    cfg.simulate.seed = 9;
    cfg.simulate.n_particles = 2;
    cfg.simulate.diffusion.n_frames = 6;
    cfg.simulate.scene.image_width = 96;
    cfg.simulate.scene.image_height = 80;
    cfg.simulate.scene.pixel_size = 1.0;
    const fs::path a = scratch("ds_a"), b = scratch("ds_b");
    write_dataset(a, cfg, 1);
    write_dataset(b, cfg, 3);
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        EXPECT_EQ(read_text(entry.path()), read_text(b / rel)) << rel;
        EXPECT_NE(entry.path().extension(), ".tmp");
    }
    EXPECT_EQ(list_sequence(a / "frames", "frame").size(), 6u);
    const auto masks = read_masks(a);
    ASSERT_EQ(masks.size(), 6u);
    EXPECT_EQ(masks[0].width(), 96u);
    const auto meta = read_meta(a / "meta.json");
    EXPECT_EQ(meta.format_version, kDatasetFormatVersion);
    EXPECT_EQ(meta.seed, 9u);
    EXPECT_EQ(meta.n_particles, 2);
    EXPECT_EQ(meta.scene.image_height, 80u);
    EXPECT_EQ(meta.config_hash, fnv1a_hex(canonical_string(meta.scene)));
    EXPECT_EQ(parse_config(read_text(a / "config.json")).simulate.seed, 9u);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Dataset, MissingFrameIsNamed) {
    const fs::path d = scratch("gap");
    const Image16 img(4, 4, 0);
    write_atomic(d / "mask_00000.pgm", pgm::encode(img));
    write_atomic(d / "mask_00002.pgm", pgm::encode(img));
    try {
        list_sequence(d, "mask");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("mask_00001.pgm"), std::string::npos);
    }
    fs::remove_all(d);
}

TEST(Dataset, ScenarioStaysInsideFieldOfView) {
    SimulateConfig sim;
    sim.seed = 4;
    sim.n_particles.reset();
    sim.random_thickness = true;
    sim.diffusion.n_frames = 400;
    sim.diffusion.diffusion_coefficient = 50.0;
    sim.scene.image_width = sim.scene.image_height = 128;
    const Scenario sc = make_scenario(sim);
    EXPECT_GE(sc.n_particles, 1);
    EXPECT_LE(sc.n_particles, 8);
    EXPECT_NE(std::find(kThicknessGrid.begin(), kThicknessGrid.end(), sc.scene.thickness), kThicknessGrid.end());
    const double r = sc.scene.shape.extent();
    for (const auto& t : sc.trajectories)
        for (const auto& s : t.samples) {
            EXPECT_GE(s.x, r - 1e-9);
            EXPECT_LE(s.x, sc.scene.fov_width() - r + 1e-9);
            EXPECT_GE(s.y, r - 1e-9);
            EXPECT_LE(s.y, sc.scene.fov_height() - r + 1e-9);
        }
    sim.seed.reset();
    EXPECT_THROW(make_scenario(sim), ConfigError);
}

TEST(Dataset, AddingParticlesKeepsExistingOnes) {
    SimulateConfig sim;
    sim.seed = 77;
    sim.n_particles = 2;
    sim.scene.image_width = sim.scene.image_height = 128;
    const auto two = make_scenario(sim);
    sim.n_particles = 5;
    const auto five = make_scenario(sim);
    EXPECT_EQ(two.trajectories[0], five.trajectories[0]);
    EXPECT_EQ(two.trajectories[1], five.trajectories[1]);
}
