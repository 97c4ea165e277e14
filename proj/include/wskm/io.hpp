#ifndef WSKM_IO_HPP
#define WSKM_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/matrix.hpp"
#include "wskm/pipeline.hpp"
#include "wskm/tags.hpp"

namespace wskm {

// ---------------------------------------------------------------------------
// DMAT: `DMAT <rows> <cols>\n` followed by rows*cols IEEE binary64 values,
// row-major, little-endian, no padding. The byte order is pinned explicitly
// so files round-trip bit-identically across machines.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_f64_le(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

inline bool get_f64_le(std::istream& in, double& v) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    std::memcpy(&v, &bits, sizeof v);
    return true;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_dmat(std::ostream& out, const Matrix& m) {
    if (!m.all_finite())
        throw IoError(IoCode::non_finite, "refusing to write non-finite matrix entries");
    out << "DMAT " << m.rows << " " << m.cols << "\n";
    for (double v : m.data) detail::put_f64_le(out, v);
    if (!out) throw IoError(IoCode::open_failed, "write failed");
}

inline Matrix read_dmat(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw IoError(IoCode::truncated, "missing DMAT header");
    std::istringstream hdr(line);
    std::string magic;
    std::size_t rows = 0, cols = 0;
    if (!(hdr >> magic) || magic != "DMAT")
        throw IoError(IoCode::bad_magic, "expected DMAT header, got \"" + line + "\"");
    std::string trailing;
    if (!(hdr >> rows >> cols) || (hdr >> trailing))
        throw IoError(IoCode::bad_format, "malformed DMAT header \"" + line + "\"");
    if (rows != 0 && cols > std::numeric_limits<std::size_t>::max() / 8 / rows)
        throw IoError(IoCode::bad_format, "implausible DMAT dimensions " + line);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        if (!detail::get_f64_le(in, m.data[i]))
            throw IoError(IoCode::truncated,
                          "DMAT payload ends after " + std::to_string(i) + " of " +
                              std::to_string(m.data.size()) + " values");
        if (!std::isfinite(m.data[i]))
            throw IoError(IoCode::non_finite,
                          "non-finite value at index " + std::to_string(i));
    }
    return m;
}

inline void write_dmat(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoCode::open_failed, "cannot open " + path + " for writing");
    write_dmat(out, m);
}

/// Reads a standalone DMAT file; trailing bytes beyond the payload are
/// rejected (a longer payload than the header promises is as corrupt as a
/// shorter one).
inline Matrix read_dmat(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoCode::open_failed, "cannot open " + path);
    Matrix m = read_dmat(in);
    if (in.peek() != std::char_traits<char>::eof())
        throw IoError(IoCode::bad_format, path + ": trailing bytes after DMAT payload");
    return m;
}

// ---------------------------------------------------------------------------
// Labels: one UTF-8 line per row holding a tag name, or `-` for unlabeled.
// A blank line closes the current sequence (runs of blank lines collapse).
// ---------------------------------------------------------------------------

struct LabelData {
    std::vector<int> labels;          // tag index per row, kUnlabeled for `-`
    std::vector<std::size_t> seq_lens;

    std::vector<TaggedSequence> sequences() const {
        std::vector<TaggedSequence> out;
        std::size_t pos = 0;
        for (std::size_t len : seq_lens) {
            TaggedSequence s;
            s.tags.assign(labels.begin() + static_cast<std::ptrdiff_t>(pos),
                          labels.begin() + static_cast<std::ptrdiff_t>(pos + len));
            out.push_back(std::move(s));
            pos += len;
        }
        return out;
    }
};

inline LabelData read_labels(const std::string& path, const std::vector<std::string>& tags) {
    std::ifstream in(path);
    if (!in) throw IoError(IoCode::open_failed, "cannot open " + path);
    LabelData out;
    std::size_t current = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (current > 0) out.seq_lens.push_back(current);
            current = 0;
            continue;
        }
        if (line == "-") {
            out.labels.push_back(kUnlabeled);
        } else {
            int t = -1;
            for (std::size_t u = 0; u < tags.size(); ++u)
                if (tags[u] == line) t = static_cast<int>(u);
            if (t < 0)
                throw IoError(IoCode::bad_format, path + ":" + std::to_string(line_no) +
                                                      ": unknown tag \"" + line + "\"");
            out.labels.push_back(t);
        }
        ++current;
    }
    if (current > 0) out.seq_lens.push_back(current);
    return out;
}

inline LabelData read_labels(const std::string& path, const TagMap& tag_map) {
    return read_labels(path, tag_map.tags);
}

inline void write_labels(const std::string& path, const std::vector<int>& labels,
                         const std::vector<std::size_t>& seq_lens, const TagMap& tag_map) {
    std::ofstream out(path);
    if (!out) throw IoError(IoCode::open_failed, "cannot open " + path + " for writing");
    std::size_t pos = 0;
    for (std::size_t s = 0; s < seq_lens.size(); ++s) {
        if (s > 0) out << "\n";
        for (std::size_t i = 0; i < seq_lens[s]; ++i, ++pos) {
            const int t = labels[pos];
            out << (t == kUnlabeled ? std::string("-")
                                    : tag_map.tags[static_cast<std::size_t>(t)])
                << "\n";
        }
    }
    if (pos != labels.size())
        throw InvalidArgument("write_labels: sequence lengths do not cover all labels");
}

// ---------------------------------------------------------------------------
// Tag set file: one tag name per line, "O" first.
// ---------------------------------------------------------------------------

inline std::vector<std::string> read_tag_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoCode::open_failed, "cannot open " + path);
    std::vector<std::string> tags;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        tags.push_back(line);
    }
    if (tags.empty() || tags[0] != "O")
        throw IoError(IoCode::bad_format, path + ": first tag must be \"O\"");
    return tags;
}

// ---------------------------------------------------------------------------
// Model file: DMAT section for the centroids, DMAT section for the
// projection, a TAGMAP section (`index<TAB>tagname` lines) and a TRACE
// section holding the per-round fit log as CSV rows. Everything the file
// contains is written deterministically, so identical fits produce
// byte-identical files.
// ---------------------------------------------------------------------------

inline void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
    out << "iter,objective,row_sum_residual,ratio_residual\n";
    for (const TraceEntry& t : trace)
        out << t.iter << "," << detail::fmt_double(t.objective) << ","
            << detail::fmt_double(t.row_sum_residual) << ","
            << detail::fmt_double(t.ratio_residual) << "\n";
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError(IoCode::open_failed, "cannot open " + path + " for writing");
    write_trace_csv(out, trace);
}

inline void save_model(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoCode::open_failed, "cannot open " + path + " for writing");
    write_dmat(out, model.centroids);
    write_dmat(out, model.projection.u);
    out << "TAGMAP " << model.tag_map.k() << "\n";
    for (std::size_t j = 0; j < model.tag_map.k(); ++j)
        out << j << "\t" << model.tag_map.tags[static_cast<std::size_t>(model.tag_map.proto_tag[j])]
            << "\n";
    out << "TRACE " << model.trace.size() << "\n";
    write_trace_csv(out, model.trace);
    if (!out) throw IoError(IoCode::open_failed, "write failed for " + path);
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoCode::open_failed, "cannot open " + path);
    Model model;
    model.centroids = read_dmat(in);
    model.projection.u = read_dmat(in);

    std::string line;
    if (!std::getline(in, line) || line.rfind("TAGMAP ", 0) != 0)
        throw IoError(IoCode::bad_format, path + ": missing TAGMAP section");
    const std::size_t k = std::stoul(line.substr(7));
    if (k != model.centroids.rows)
        throw IoError(IoCode::bad_format, path + ": TAGMAP count does not match centroids");
    std::vector<std::string> tags{"O"};
    std::vector<int> proto_tag(k, -1);
    for (std::size_t j = 0; j < k; ++j) {
        if (!std::getline(in, line))
            throw IoError(IoCode::truncated, path + ": TAGMAP section ends early");
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw IoError(IoCode::bad_format, path + ": malformed TAGMAP line \"" + line + "\"");
        if (std::stoul(line.substr(0, tab)) != j)
            throw IoError(IoCode::bad_format, path + ": TAGMAP indices out of order");
        const std::string name = line.substr(tab + 1);
        int t = -1;
        for (std::size_t u = 0; u < tags.size(); ++u)
            if (tags[u] == name) t = static_cast<int>(u);
        if (t < 0) {
            tags.push_back(name);
            t = static_cast<int>(tags.size()) - 1;
        }
        proto_tag[j] = t;
    }
    model.tag_map = TagMap::from_proto_tags(std::move(tags), std::move(proto_tag));

    if (!std::getline(in, line) || line.rfind("TRACE ", 0) != 0)
        throw IoError(IoCode::bad_format, path + ": missing TRACE section");
    const std::size_t m = std::stoul(line.substr(6));
    if (!std::getline(in, line))
        throw IoError(IoCode::truncated, path + ": TRACE header missing");
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::getline(in, line))
            throw IoError(IoCode::truncated, path + ": TRACE section ends early");
        TraceEntry e{};
        char* end = nullptr;
        const char* s = line.c_str();
        e.iter = std::strtoull(s, &end, 10);
        if (*end != ',') throw IoError(IoCode::bad_format, path + ": bad TRACE row");
        e.objective = std::strtod(end + 1, &end);
        if (*end != ',') throw IoError(IoCode::bad_format, path + ": bad TRACE row");
        e.row_sum_residual = std::strtod(end + 1, &end);
        if (*end != ',') throw IoError(IoCode::bad_format, path + ": bad TRACE row");
        e.ratio_residual = std::strtod(end + 1, &end);
        model.trace.push_back(e);
    }
    return model;
}

/// Linear export: a DMAT section with the k x d weights followed by a
/// 1 x k DMAT section with the biases.
inline void write_linear_model(const std::string& path, const LinearModel& lm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoCode::open_failed, "cannot open " + path + " for writing");
    write_dmat(out, lm.weights);
    Matrix bias(1, lm.bias.size());
    bias.data = lm.bias;
    write_dmat(out, bias);
}

inline LinearModel read_linear_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoCode::open_failed, "cannot open " + path);
    LinearModel lm;
    lm.weights = read_dmat(in);
    const Matrix bias = read_dmat(in);
    if (bias.rows != 1 || bias.cols != lm.weights.rows)
        throw IoError(IoCode::bad_format, path + ": bias shape does not match weights");
    lm.bias = bias.data;
    return lm;
}

}  // namespace wskm

#endif  // WSKM_IO_HPP
