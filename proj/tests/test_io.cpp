#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cpka/io.hpp"
#include "cpka/tensor.hpp"
#include "cpka/wav.hpp"
#include "helpers.hpp"

using namespace cpka;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "cpka_io";
    fs::create_directories(d);
    return d / name;
}

}  // namespace

TEST(Format, RoundTripsExactly) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(fmt(v)), v);
    EXPECT_EQ(fmt(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Wav, SixteenBitRoundTrip) {
    const std::string p = scratch("tone.wav").string();
    std::vector<double> v{0.0, 0.5, -0.5, 0.999, -1.0};
    write_wav(p, v, 8000);
    const WavData w = read_wav(p);
    EXPECT_EQ(w.sample_rate, 8000);
    EXPECT_EQ(w.channels, 1);
    ASSERT_EQ(w.frames(), 5u);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(w.samples[i], v[i], 1.0 / 32767);
}

TEST(Wav, RejectsOtherFormats) {
    const std::string p = scratch("float.wav").string();
    std::ofstream os(p, std::ios::binary);
    auto u32 = [&](std::uint32_t x) { os.write(reinterpret_cast<const char*>(&x), 4); };
    auto u16 = [&](std::uint16_t x) { os.write(reinterpret_cast<const char*>(&x), 2); };
    os.write("RIFF", 4);
    u32(36 + 8);
    os.write("WAVEfmt ", 8);
    u32(16);
    u16(3);  // IEEE float
    u16(1);
    u32(8000);
    u32(32000);
    u16(4);
    u16(32);
    os.write("data", 4);
    u32(8);
    u32(0);
    u32(0);
    os.close();
    EXPECT_THROW(read_wav(p), InputError);
    EXPECT_THROW(read_wav(scratch("missing.wav").string()), InputError);
}

TEST(SourceSetCsv, RealAndComplex) {
    SourceSet r(testutil::random_real(2, 10, 1), {"a", "b"}, 250.0);
    write_sourceset_csv(scratch("r.csv").string(), r);
    const SourceSet rb = read_sourceset_csv(scratch("r.csv").string());
    EXPECT_EQ(rb.data, r.data);
    EXPECT_EQ(rb.labels, r.labels);
    EXPECT_EQ(rb.sample_rate, 250.0);

    SourceSet c(testutil::random_complex(3, 7, 2), {}, 1e6);
    write_sourceset_csv(scratch("c.csv").string(), c);
    const SourceSet cb = read_sourceset_csv(scratch("c.csv").string());
    EXPECT_EQ(cb.data, c.data);
    EXPECT_EQ(cb.labels, c.labels);
}

TEST(TensorFiles, CsvAndBinary) {
    const FourthOrderTensor t = fourth_moment_tensor(testutil::random_complex(3, 40, 3));
    write_tensor_csv(scratch("t.csv").string(), t);
    EXPECT_EQ(read_tensor_csv(scratch("t.csv").string()).data(), t.data());
    write_tensor_binary(scratch("t.bin").string(), t);
    EXPECT_EQ(read_tensor_binary(scratch("t.bin").string()).data(), t.data());
    EXPECT_EQ(fs::file_size(scratch("t.bin")), 16u + 81u * 16u);
}

TEST(UnmixingFiles, MatrixAndSidecar) {
    UnmixingMatrix w;
    w.w = testutil::random_complex(3, 2, 4);
    w.algorithm = "pka";
    w.diagnostics = {{12, 1e-11, 0, true}, {5000, 1e-3, 20, false}};
    const std::string p = scratch("w.csv").string();
    write_unmixing_csv(p, w);
    const UnmixingMatrix b = read_unmixing_csv(p);
    EXPECT_EQ(b.w, w.w);
    EXPECT_EQ(b.algorithm, "pka");
    ASSERT_EQ(b.diagnostics.size(), 2u);
    EXPECT_EQ(b.diagnostics[1].restarts, 20);
    EXPECT_FALSE(b.diagnostics[1].converged);
    EXPECT_TRUE(fs::exists(p + ".json"));
}

TEST(Report, CsvRowAndJson) {
    SeparationReport r;
    r.algorithm = "jade";
    r.seed = 3;
    r.isi = 0.5;
    r.acc = 0.9;
    r.sdr_db = {10, 20};
    r.matching = {1, 0};
    r.extras["n_sources"] = 2;
    EXPECT_EQ(report_csv_header(), "algorithm,seed,isi,acc,sdr_mean,sdr_min,extras");
    EXPECT_EQ(report_csv_row(r), "jade,3,0.5,0.9,15,10,n_sources=2;converged=1");
    const auto j = nlohmann::json::parse(report_json(r));
    EXPECT_EQ(j["sdr_min"].get<double>(), 10.0);
    EXPECT_EQ(j["matching"][0].get<int>(), 1);
}
