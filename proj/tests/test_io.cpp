#include <doctest.h>

#include "test_util.hpp"
#include "xmorph/error.hpp"
#include "xmorph/io.hpp"

using namespace xmorph;
using testutil::scratch_dir;
using testutil::write_file;

TEST_SUITE("io") {

TEST_CASE("load_pgm decodes P5") {
    const auto dir = scratch_dir("io_p5");
    std::string body = "P5\n2 2\n255\n";
    body += '\0';
    body += static_cast<char>(255);
    body += '\0';
    body += static_cast<char>(255);
    write_file(dir / "a.pgm", body);

    const GrayImage img = load_pgm(dir / "a.pgm");
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 0) == 255);
    CHECK(img.at(0, 1) == 0);
    CHECK(img.at(1, 1) == 255);
}

TEST_CASE("load_pgm decodes P2 with comments") {
    const auto dir = scratch_dir("io_p2");
    write_file(dir / "a.pgm", "P2\n# a comment\n1 1\n255\n7\n");
    const GrayImage img = load_pgm(dir / "a.pgm");
    CHECK(img.width == 1);
    CHECK(img.at(0, 0) == 7);
}

TEST_CASE("P2 and P5 of the same pixels agree") {
    const auto dir = scratch_dir("io_agree");
    write_file(dir / "a.pgm", "P2\n3 2\n255\n0 10 20 30 40 50\n");
    std::string body = "P5\n3 2\n255\n";
    for (int v : {0, 10, 20, 30, 40, 50}) body += static_cast<char>(v);
    write_file(dir / "b.pgm", body);
    CHECK(load_pgm(dir / "a.pgm").pixels == load_pgm(dir / "b.pgm").pixels);
}

TEST_CASE("load_pgm rejects bad input with byte offsets") {
    const auto dir = scratch_dir("io_bad");
    write_file(dir / "magic.pgm", "P6\n1 1\n255\nx");
    CHECK_THROWS_AS(load_pgm(dir / "magic.pgm"), LoadError);

    write_file(dir / "maxval.pgm", "P5\n2 2\n65535\nxxxxxxxx");
    CHECK_THROWS_WITH_AS(load_pgm(dir / "maxval.pgm"),
                         doctest::Contains("unsupported maxval"), LoadError);

    write_file(dir / "trunc.pgm", "P5\n4 4\n255\nxx");
    CHECK_THROWS_WITH_AS(load_pgm(dir / "trunc.pgm"), doctest::Contains("truncated"),
                         LoadError);
}

TEST_CASE("load_mask thresholds at intensity > 0") {
    const auto dir = scratch_dir("io_mask");
    write_file(dir / "m.pgm", "P2\n3 1\n255\n0 128 255\n");
    const BinaryMask m = load_mask(dir / "m.pgm");
    CHECK_FALSE(m.at(0, 0));
    CHECK(m.at(1, 0));
    CHECK(m.at(2, 0));

    write_file(dir / "zero.pgm", "P2\n2 2\n255\n0 0 0 0\n");
    CHECK(load_mask(dir / "zero.pgm").count() == 0);
}

TEST_CASE("manifest parsing") {
    const auto dir = scratch_dir("io_manifest");
    write_file(dir / "m.csv",
               "sample_id,image,mask,orientation,label,deep_key\n"
               "s1,a.pgm,am.pgm,Axial,glioma,k1\n"
               "s2,b.pgm,bm.pgm,sagittal,,\n"
               "s3,c.pgm,cm.pgm,CORONAL,pituitary,k3\n");
    const auto rows = load_manifest(dir / "m.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].sample_id == "s1");
    CHECK(rows[0].orientation == Orientation::axial); // case-insensitive
    CHECK(rows[1].orientation == Orientation::sagittal);
    CHECK(rows[2].orientation == Orientation::coronal);
    CHECK(rows[0].label.value() == "glioma");
    CHECK_FALSE(rows[1].label.has_value());
    CHECK_FALSE(rows[1].deep_key.has_value());

    write_file(dir / "dup.csv",
               "sample_id,image,mask,orientation,label,deep_key\n"
               "s1,a,b,axial,,\n"
               "s1,c,d,axial,,\n");
    CHECK_THROWS_WITH_AS(load_manifest(dir / "dup.csv"),
                         doctest::Contains("lines 2 and 3"), LoadError);

    write_file(dir / "orient.csv",
               "sample_id,image,mask,orientation,label,deep_key\n"
               "s1,a,b,oblique,,\n");
    CHECK_THROWS_AS(load_manifest(dir / "orient.csv"), LoadError);
}

TEST_CASE("deep feature table") {
    const auto dir = scratch_dir("io_deep");
    write_file(dir / "d.csv",
               "key,f0,f1,f2,f3,f4,f5,f6,f7\n"
               "a,1,2,3,4,5,6,7,8\n"
               "b,0.5,0,0,0,0,0,0,-1\n"
               "c,1,1,1,1,1,1,1,1\n"
               "d,2,2,2,2,2,2,2,2\n");
    const auto table = load_deep_features(dir / "d.csv");
    CHECK(table.size() == 4);
    CHECK(table.width() == 8);
    CHECK(table.row("b")[0] == 0.5);
    CHECK(table.row("b")[7] == -1.0);
    CHECK_THROWS_AS(table.row("zzz"), LoadError);

    write_file(dir / "nan.csv", "key,f0\na,NaN\n");
    CHECK_THROWS_WITH_AS(load_deep_features(dir / "nan.csv"),
                         doctest::Contains("column 1"), LoadError);

    write_file(dir / "empty.csv", "");
    CHECK_THROWS_WITH_AS(load_deep_features(dir / "empty.csv"),
                         doctest::Contains("no header"), LoadError);

    write_file(dir / "ragged.csv", "key,f0,f1\na,1\n");
    CHECK_THROWS_WITH_AS(load_deep_features(dir / "ragged.csv"),
                         doctest::Contains("ragged"), LoadError);
}

TEST_CASE("feature csv write determinism and round trip") {
    const auto dir = scratch_dir("io_features");
    FeatureRecord r1;
    r1.sample_id = "s2";
    for (int f = 0; f < kTsfCount; ++f)
        r1.set(static_cast<TsfFeature>(f), 0.123456789 * (f + 1));
    FeatureRecord r2;
    r2.sample_id = "s1";
    for (int f = 0; f < kTsfCount; ++f)
        r2.set(static_cast<TsfFeature>(f), -7.5e-4 * (f + 1));
    r2.present[kMls] = false; // gated column stays empty

    const std::vector<FeatureRecord> recs = {r1, r2};
    write_feature_csv(recs, dir / "a.csv");
    write_feature_csv(recs, dir / "b.csv");
    CHECK(testutil::read_file(dir / "a.csv") == testutil::read_file(dir / "b.csv"));

    const auto back = load_feature_csv(dir / "a.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].sample_id == "s1"); // sorted by id
    CHECK_FALSE(back[0].present[kMls]);
    for (int f = 0; f < kTsfCount; ++f) {
        if (!back[1].present[f]) continue;
        CHECK(back[1].values[f] ==
              doctest::Approx(r1.values[f]).epsilon(1e-5)); // 6 significant digits
    }

    CHECK_THROWS_AS(write_feature_csv({}, dir / "zero.csv"), PreconditionError);
}

} // TEST_SUITE
