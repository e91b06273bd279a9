#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "geonet/cli.hpp"
#include "geonet/datapipe.hpp"
#include "geonet/raster.hpp"
#include "test_util.hpp"

using namespace geonet;
using geonet::testing::random_image;
using geonet::testing::scratch_dir;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "geonet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void expect_single_line_error(const Run& r, int code) {
    EXPECT_EQ(r.code, code) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
}

}  // namespace

TEST(CliTransforms, ListCounts) {
    EXPECT_EQ(lines(cli({"transforms", "list", "--dim", "2"}).out).size(), 8u);
    EXPECT_EQ(lines(cli({"transforms", "list"}).out).size(), 8u);
    EXPECT_EQ(lines(cli({"transforms", "list", "--dim", "serial"}).out).size(), 16u);
    const auto three = lines(cli({"transforms", "list", "--dim", "3"}).out);
    EXPECT_EQ(three.size(), 19u);
    EXPECT_EQ(three.back(), "# candidates 18, distinct 12");
    expect_single_line_error(cli({"transforms", "list", "--dim", "4"}), 1);
}

TEST(CliTransforms, TableEntriesInRange) {
    const auto rows = lines(cli({"transforms", "table"}).out);
    ASSERT_EQ(rows.size(), 9u);
    std::size_t entries = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::istringstream in(rows[r]);
        int a, v;
        in >> a;
        EXPECT_EQ(a, static_cast<int>(r - 1));
        while (in >> v) {
            EXPECT_GE(v, 0);
            EXPECT_LE(v, 7);
            ++entries;
        }
    }
    EXPECT_EQ(entries, 64u);
}

TEST(CliTransforms, ApplyAndHistogramInvariance) {
    const auto dir = scratch_dir("cli_apply");
    const auto img = GrayImage::from_bytes(5, 7, random_image(5, 7, 1).to_bytes());
    write_pgm(dir / "in.pgm", img);
    ASSERT_EQ(cli({"transforms", "apply", "--label", "0", "--in", (dir / "in.pgm").string(), "--out",
                   (dir / "same.pgm").string()})
                  .code,
              0);
    EXPECT_EQ(slurp(dir / "same.pgm"), slurp(dir / "in.pgm"));
    ASSERT_EQ(cli({"transforms", "apply", "--label", "5", "--in", (dir / "in.pgm").string(), "--out",
                   (dir / "t5.pgm").string()})
                  .code,
              0);
    EXPECT_EQ(read_pgm(dir / "t5.pgm"), apply_2d(img, orient_2d(5)));
    EXPECT_EQ(cli({"hist", "--in", (dir / "in.pgm").string()}).out, cli({"hist", "--in", (dir / "t5.pgm").string()}).out);
    expect_single_line_error(cli({"transforms", "apply", "--label", "8", "--in", (dir / "in.pgm").string(), "--out",
                                  (dir / "x.pgm").string()}),
                             1);
    expect_single_line_error(cli({"transforms", "apply", "--label", "1", "--in", (dir / "nope.pgm").string(), "--out",
                                  (dir / "x.pgm").string()}),
                             2);
    EXPECT_FALSE(std::filesystem::exists(dir / "x.pgm"));
}

TEST(CliHist, CountsAndChart) {
    const auto dir = scratch_dir("cli_hist");
    write_pgm(dir / "flat.pgm", GrayImage(6, 9, 0.5f));
    const auto r = cli({"hist", "--in", (dir / "flat.pgm").string(), "--png-out", (dir / "h.png").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 256u);
    std::size_t nonzero = 0, total = 0;
    for (const auto& row : rows) {
        std::istringstream in(row);
        std::size_t bin, count;
        in >> bin >> count;
        total += count;
        nonzero += count > 0;
    }
    EXPECT_EQ(nonzero, 1u);
    EXPECT_EQ(total, 54u);
    EXPECT_TRUE(std::filesystem::exists(dir / "h.png"));
    expect_single_line_error(cli({"hist", "--in", (dir / "missing.pgm").string()}), 2);
}

TEST(CliDataset, SynthWritesEightyLabeledImages) {
    const auto dir = scratch_dir("cli_synth");
    const auto r = cli({"dataset", "synth", "--n", "10", "--seed", "3", "--size", "32", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_manifest(dir / "manifest.tsv");
    EXPECT_EQ(rows.size(), 80u);
    std::size_t pgms = 0;
    for (const char* side : {"train", "test"})
        for (const auto& e : std::filesystem::recursive_directory_iterator(dir / side)) pgms += e.path().extension() == ".pgm";
    EXPECT_EQ(pgms, 80u);
    std::map<std::string, std::set<std::string>> sides;
    for (const auto& row : rows) sides[row.source_id].insert(row.split);
    for (const auto& [id, s] : sides) EXPECT_EQ(s.size(), 1u) << id;
}

TEST(CliDataset, Prepare174SlicesGives1392Samples) {
    const auto src = scratch_dir("cli_prepare_in");
    const auto dst = scratch_dir("cli_prepare_out");
    for (const auto& s : synth_slices(174, 1, 32)) write_pgm(src / (s.id + ".pgm"), s.image);
    const auto r = cli({"dataset", "prepare", "--in", src.string(), "--out", dst.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_manifest(dst / "manifest.tsv");
    EXPECT_EQ(rows.size(), 1392u);
    std::size_t train = 0;
    for (const auto& row : rows) train += row.split == "train";
    EXPECT_EQ(train, 139u * 8u);
    expect_single_line_error(cli({"dataset", "prepare", "--in", (src / "absent").string(), "--out", dst.string()}), 2);
}

TEST(CliTrain, TrainEvalPredictFix) {
    const auto dir = scratch_dir("cli_train");
    std::ofstream(dir / "small.cfg") << "epochs = 2\nbatch_size = 8\ninput_size = 16\nsynthetic_slices = 10\n"
                                        "phantom_size = 32\nseed = 3\n";
    const auto cfg = (dir / "small.cfg").string(), ckpt = (dir / "m.ckpt").string(), csv = (dir / "m.csv").string();
    const auto t = cli({"train", "--config", cfg, "--checkpoint", ckpt, "--metrics", csv});
    ASSERT_EQ(t.code, 0) << t.err;
    const auto rows = lines(slurp(csv));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "epoch,train_loss,train_acc,test_loss,test_acc");
    const std::string final_acc = rows.back().substr(rows.back().rfind(',') + 1);

    const auto e = cli({"eval", "--config", cfg, "--checkpoint", ckpt, "--confusion", (dir / "conf.tsv").string()});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_NE(e.out.find("test_acc " + final_acc + "\n"), std::string::npos) << e.out << " vs " << final_acc;
    EXPECT_EQ(lines(slurp(dir / "conf.tsv")).size(), 8u);

    const auto img = synth_phantom(123, 40, 40);
    write_pgm(dir / "x.pgm", img);
    const auto p = cli({"predict", "--checkpoint", ckpt, "--in", (dir / "x.pgm").string()});
    ASSERT_EQ(p.code, 0) << p.err;
    const auto pl = lines(p.out);
    ASSERT_EQ(pl.size(), 2u);
    std::istringstream probs(pl[1]);
    std::string word;
    probs >> word;
    double sum = 0.0, q;
    int n = 0;
    while (probs >> q) {
        sum += q;
        ++n;
    }
    EXPECT_EQ(n, 8);
    EXPECT_NEAR(sum, 1.0, 1e-5);

    const auto f = cli({"fix", "--checkpoint", ckpt, "--in", (dir / "x.pgm").string(), "--out", (dir / "fixed.pgm").string()});
    ASSERT_EQ(f.code, 0) << f.err;
    const int label = std::stoi(pl[0].substr(6));
    EXPECT_EQ(read_pgm(dir / "fixed.pgm"), apply_2d(read_pgm(dir / "x.pgm"), inverse_2d(orient_2d(label))));

    expect_single_line_error(cli({"predict", "--checkpoint", (dir / "none.ckpt").string(), "--in",
                                  (dir / "x.pgm").string()}),
                             2);
    std::ofstream(dir / "bad.cfg") << "epochs = 2\nlearnig_rate = 0.1\n";
    const auto bad = cli({"train", "--config", (dir / "bad.cfg").string(), "--checkpoint", (dir / "b.ckpt").string()});
    expect_single_line_error(bad, 1);
    EXPECT_NE(bad.err.find("learnig_rate"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(dir / "b.ckpt"));
}

TEST(CliUsage, ExitCodes) {
    expect_single_line_error(cli({}), 1);
    expect_single_line_error(cli({"frobnicate"}), 1);
    expect_single_line_error(cli({"transforms", "apply", "--label", "1"}), 1);
    const auto help = cli({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("transforms"), std::string::npos);
}

TEST(CliBinary, ExitCodesFromTheExecutable) {
    const auto dir = scratch_dir("cli_binary");
    const std::string exe = GEONET_EXE;
    const auto status = [&](const std::string& args) {
        const int s = std::system((exe + " " + args + " >" + (dir / "o.txt").string() + " 2>" + (dir / "e.txt").string()).c_str());
        return WEXITSTATUS(s);
    };
    EXPECT_EQ(status("transforms list --dim 2"), 0);
    EXPECT_EQ(lines(slurp(dir / "o.txt")).size(), 8u);
    EXPECT_EQ(status("transforms apply --label 9 --in a --out b"), 1);
    EXPECT_EQ(status("hist --in " + (dir / "missing.pgm").string()), 2);
    EXPECT_EQ(lines(slurp(dir / "e.txt")).size(), 1u);
}
