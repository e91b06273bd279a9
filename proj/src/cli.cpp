#include "geonet/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "geonet/config.hpp"
#include "geonet/datapipe.hpp"
#include "geonet/error.hpp"
#include "geonet/io.hpp"
#include "geonet/orient_group.hpp"
#include "geonet/raster.hpp"
#include "geonet/trainer.hpp"

namespace geonet {

namespace {

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

std::string fmt9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void print_matrix(std::ostream& out, const Mat2i& m) {
    out << "[[" << m[0][0] << ',' << m[0][1] << "],[" << m[1][0] << ',' << m[1][1] << "]]";
}

void print_matrix(std::ostream& out, const Mat3i& m) {
    out << '[';
    for (std::size_t r = 0; r < 3; ++r)
        out << (r ? ",[" : "[") << m[r][0] << ',' << m[r][1] << ',' << m[r][2] << ']';
    out << ']';
}

void list_transforms(std::ostream& out, const std::string& dim) {
    if (dim == "2") {
        for (const auto& t : enumerate_2d()) {
            out << t.label << '\t' << t.name() << '\t';
            print_matrix(out, t.matrix);
            out << '\n';
        }
    } else if (dim == "3") {
        const auto& e = enumerate_3d();
        static const char* const planes[] = {"xOy", "xOz", "yOz"};
        static const char* const rots[] = {"I", "Rx90", "Rx180", "Rx270", "Ry90", "Ry270"};
        for (std::size_t i = 0; i < e.candidates.size(); ++i) {
            const Mat3i& m = e.candidates[i];
            int distinct = -1;
            for (const auto& t : e.transforms)
                if (t.matrix == m) distinct = t.label;
            out << i << '\t' << rots[i % 6] << "*F_" << planes[i / 6] << '\t';
            print_matrix(out, m);
            out << "\tdet=" << determinant(m) << "\tclass=" << distinct << '\n';
        }
        out << "# candidates " << e.raw_count() << ", distinct " << e.distinct_count() << '\n';
    } else {
        for (const auto& s : enumerate_serial()) {
            out << s.label() << '\t' << s.planar.name() << (s.time_reversed ? "+reverse" : "") << '\t';
            print_matrix(out, s.planar.matrix);
            out << '\t' << (s.time_reversed ? 1 : 0) << '\n';
        }
    }
}

void print_table(std::ostream& out) {
    out << "a\\b";
    for (int b = 0; b < kNumOrient2D; ++b) out << '\t' << b;
    out << '\n';
    for (int a = 0; a < kNumOrient2D; ++a) {
        out << a;
        for (int b = 0; b < kNumOrient2D; ++b) out << '\t' << compose_2d(orient_2d(a), orient_2d(b)).label;
        out << '\n';
    }
}

void print_manifest_summary(std::ostream& out, const std::vector<ManifestRow>& rows, const std::filesystem::path& dir) {
    std::size_t train = 0;
    for (const auto& r : rows) train += r.split == "train";
    out << "wrote " << rows.size() << " images (" << train << " train, " << rows.size() - train << " test) to "
        << dir.string() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-supervised orientation recognition for 2D slices", "geonet"};
    app.require_subcommand(1);

    // transforms
    auto* transforms = app.add_subcommand("transforms", "Inspect and apply orientation transforms");
    transforms->require_subcommand(1);
    std::string dim = "2";
    auto* t_list = transforms->add_subcommand("list", "List transforms with their matrices");
    t_list->add_option("--dim", dim, "2, 3 or serial")->check(CLI::IsMember({"2", "3", "serial"}));
    int label = 0;
    std::string in_path, out_path;
    auto* t_apply = transforms->add_subcommand("apply", "Apply a 2D transform to a PGM image");
    t_apply->add_option("--label", label, "Transform label 0..7")->required()->check(CLI::Range(0, 7));
    t_apply->add_option("--in", in_path)->required();
    t_apply->add_option("--out", out_path)->required();
    auto* t_table = transforms->add_subcommand("table", "Print the 8x8 composition table (row a, column b: a*b)");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Build labeled datasets");
    dataset->require_subcommand(1);
    std::size_t n_slices = 200;
    std::uint64_t seed = 0;
    std::size_t size = 96;
    bool no_clahe = false;
    auto* d_synth = dataset->add_subcommand("synth", "Synthesize phantom slices and expand them");
    d_synth->add_option("--n", n_slices, "Number of source slices")->check(CLI::Range(5, 1000000));
    d_synth->add_option("--seed", seed);
    d_synth->add_option("--size", size, "Phantom side length")->check(CLI::Range(32, 4096));
    d_synth->add_option("--out", out_path)->required();
    d_synth->add_flag("--no-clahe", no_clahe, "Skip equalization");
    auto* d_prepare = dataset->add_subcommand("prepare", "Split and expand a directory of PGM slices");
    d_prepare->add_option("--in", in_path)->required();
    d_prepare->add_option("--out", out_path)->required();
    d_prepare->add_option("--seed", seed);
    d_prepare->add_flag("--no-clahe", no_clahe, "Skip equalization");

    // train / eval / predict / fix
    std::string config_path, checkpoint = "geonet.ckpt", metrics_path = "metrics.csv", confusion_path;
    auto* train_cmd = app.add_subcommand("train", "Train from a config file");
    train_cmd->add_option("--config", config_path)->required();
    train_cmd->add_option("--checkpoint", checkpoint, "Output checkpoint")->capture_default_str();
    train_cmd->add_option("--metrics", metrics_path, "Output metrics CSV")->capture_default_str();
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the config's test split");
    eval_cmd->add_option("--config", config_path)->required();
    eval_cmd->add_option("--checkpoint", checkpoint)->required();
    eval_cmd->add_option("--confusion", confusion_path, "Write the confusion matrix here");
    auto* predict_cmd = app.add_subcommand("predict", "Predict the transform applied to an image");
    predict_cmd->add_option("--checkpoint", checkpoint)->required();
    predict_cmd->add_option("--in", in_path)->required();
    auto* fix_cmd = app.add_subcommand("fix", "Undo the predicted transform");
    fix_cmd->add_option("--checkpoint", checkpoint)->required();
    fix_cmd->add_option("--in", in_path)->required();
    fix_cmd->add_option("--out", out_path)->required();

    // hist
    std::string png_out;
    auto* hist_cmd = app.add_subcommand("hist", "Print the 256-bin histogram of a PGM image");
    hist_cmd->add_option("--in", in_path)->required();
    hist_cmd->add_option("--png-out", png_out, "Render the histogram as a PNG bar chart");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return 1;
    }

    try {
        if (*t_list) {
            list_transforms(out, dim);
        } else if (*t_apply) {
            write_pgm(out_path, apply_2d(read_pgm(in_path), orient_2d(label)));
        } else if (*t_table) {
            print_table(out);
        } else if (*d_synth) {
            const auto slices = synth_slices(n_slices, seed, size);
            PrepareOptions opts;
            opts.equalize = !no_clahe;
            for (const auto& s : slices) write_pgm(std::filesystem::path(out_path) / "slices" / (s.id + ".pgm"), s.image);
            const auto rows = materialize_dataset(slices, make_split(slices.size(), seed), opts, out_path);
            print_manifest_summary(out, rows, out_path);
        } else if (*d_prepare) {
            const auto slices = load_slices(in_path);
            PrepareOptions opts;
            opts.equalize = !no_clahe;
            const auto rows = materialize_dataset(slices, make_split(slices.size(), seed), opts, out_path);
            print_manifest_summary(out, rows, out_path);
        } else if (*train_cmd) {
            const TrainConfig cfg = load_config(config_path);
            const Dataset data = prepare_dataset(cfg);
            out << "slices " << data.slices.size() << ", train samples " << data.train.size() << ", test samples "
                << data.test.size() << '\n';
            std::vector<EpochMetrics> so_far;
            const TrainResult r = train(cfg, data, [&](const EpochMetrics& m) {
                out << "epoch " << m.epoch << " train_loss " << format_metric(m.train_loss) << " train_acc "
                    << format_metric(m.train_accuracy) << " test_loss " << format_metric(m.test_loss) << " test_acc "
                    << format_metric(m.test_accuracy) << std::endl;
                so_far.push_back(m);
                write_file_atomic(metrics_path, format_metrics_csv(so_far));
            });
            save_checkpoint(checkpoint, r.model, r.preprocess);
            out << "wrote " << checkpoint << " and " << metrics_path << '\n';
        } else if (*eval_cmd) {
            const TrainConfig cfg = load_config(config_path);
            const Checkpoint ck = load_checkpoint(checkpoint);
            if (ck.preprocess.input_size != cfg.input_size)
                throw ConfigError("checkpoint input size " + std::to_string(ck.preprocess.input_size) +
                                  " differs from config input_size " + std::to_string(cfg.input_size));
            const Dataset data = prepare_dataset(cfg);
            const Evaluation ev = evaluate(ck.model, evaluation_views(data.test, ck.preprocess));
            out << "samples " << ev.count << '\n'
                << "test_loss " << format_metric(ev.loss) << '\n'
                << "test_acc " << format_metric(ev.accuracy) << '\n';
            if (!confusion_path.empty()) write_file_atomic(confusion_path, format_confusion(ev.confusion));
        } else if (*predict_cmd) {
            const Checkpoint ck = load_checkpoint(checkpoint);
            const Prediction p = predict_orientation(ck.model, ck.preprocess, read_pgm(in_path));
            out << "label " << p.label << '\n' << "probabilities";
            for (double q : p.probabilities) out << ' ' << fmt9(q);
            out << '\n';
        } else if (*fix_cmd) {
            const Checkpoint ck = load_checkpoint(checkpoint);
            const GrayImage img = read_pgm(in_path);
            const Prediction p = predict_orientation(ck.model, ck.preprocess, img);
            write_pgm(out_path, apply_2d(img, inverse_2d(orient_2d(p.label))));
            out << "label " << p.label << '\n';
        } else if (*hist_cmd) {
            const Histogram h = histogram(read_pgm(in_path));
            for (std::size_t i = 0; i < h.bins.size(); ++i) out << i << '\t' << h.bins[i] << '\n';
            if (!png_out.empty()) write_png(png_out, render_histogram(h));
        }
    } catch (const ConfigError& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return 2;
    }
    return 0;
}

}  // namespace geonet
