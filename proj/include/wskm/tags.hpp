#ifndef WSKM_TAGS_HPP
#define WSKM_TAGS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wskm/error.hpp"

namespace wskm {

/// Label value for rows that carry no annotation.
inline constexpr int kUnlabeled = -1;

/// Tag index reserved for the outside tag "O".
inline constexpr int kOutsideTag = 0;

/// Maps prototype indices to tags. A tag may own several prototypes; the
/// outside tag "O" typically owns many since it covers heterogeneous words.
struct TagMap {
    std::vector<std::string> tags;  // tags[0] == "O" always
    std::vector<int> proto_tag;     // size k, prototype index -> tag index
    std::vector<int> o_prototypes;  // sorted indices j with proto_tag[j] == 0

    std::size_t k() const { return proto_tag.size(); }
    std::size_t tag_count() const { return tags.size(); }
    bool is_o(std::size_t proto) const { return proto_tag[proto] == kOutsideTag; }

    /// Prototype indices owned by tag `t`, ascending.
    std::vector<int> prototypes_of(int t) const {
        std::vector<int> out;
        for (std::size_t j = 0; j < proto_tag.size(); ++j)
            if (proto_tag[j] == t) out.push_back(static_cast<int>(j));
        return out;
    }

    int tag_index(const std::string& name) const {
        for (std::size_t t = 0; t < tags.size(); ++t)
            if (tags[t] == name) return static_cast<int>(t);
        return -1;
    }

    /// Builds a map from an explicit prototype -> tag assignment.
    /// `tags[0]` must be "O" and every tag must own at least one prototype.
    static TagMap from_proto_tags(std::vector<std::string> tags, std::vector<int> proto_tag) {
        if (tags.empty() || tags[0] != "O")
            throw InvalidArgument("TagMap: tag index 0 must be \"O\"");
        for (const std::string& name : tags)
            if (name.empty() || name == "-" ||
                name.find_first_of("\t\r\n") != std::string::npos)
                throw InvalidArgument("TagMap: unusable tag name \"" + name + "\"");
        for (std::size_t a = 0; a < tags.size(); ++a)
            for (std::size_t b = a + 1; b < tags.size(); ++b)
                if (tags[a] == tags[b])
                    throw InvalidArgument("TagMap: duplicate tag name " + tags[a]);
        std::vector<bool> seen(tags.size(), false);
        for (int t : proto_tag) {
            if (t < 0 || static_cast<std::size_t>(t) >= tags.size())
                throw InvalidArgument("TagMap: prototype mapped to unknown tag index " +
                                      std::to_string(t));
            seen[static_cast<std::size_t>(t)] = true;
        }
        for (std::size_t t = 0; t < tags.size(); ++t)
            if (!seen[t])
                throw InvalidArgument("TagMap: tag " + tags[t] + " owns no prototype");
        TagMap m;
        m.tags = std::move(tags);
        m.proto_tag = std::move(proto_tag);
        for (std::size_t j = 0; j < m.proto_tag.size(); ++j)
            if (m.proto_tag[j] == kOutsideTag) m.o_prototypes.push_back(static_cast<int>(j));
        return m;
    }

    /// Standard layout used by the CLI: "O" owns the first `o_prototypes`
    /// indices, then each remaining tag owns exactly one prototype in order.
    static TagMap with_o_block(std::vector<std::string> tags, std::size_t o_prototypes) {
        if (o_prototypes == 0)
            throw InvalidArgument("TagMap: need at least one O prototype");
        std::vector<int> proto_tag(o_prototypes, kOutsideTag);
        for (std::size_t t = 1; t < tags.size(); ++t) proto_tag.push_back(static_cast<int>(t));
        return from_proto_tags(std::move(tags), std::move(proto_tag));
    }
};

/// Binary n x k matrix saying which prototypes each datapoint may use.
/// Labeled rows allow only the prototypes of their tag; unlabeled rows
/// allow everything.
struct SupervisionMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bits;  // row-major

    SupervisionMask() = default;
    SupervisionMask(std::size_t r, std::size_t c, std::uint8_t fill = 1)
        : rows(r), cols(c), bits(r * c, fill) {}

    bool allowed(std::size_t i, std::size_t j) const { return bits[i * cols + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v) { bits[i * cols + j] = v ? 1 : 0; }

    std::size_t row_sum(std::size_t i) const {
        std::size_t s = 0;
        for (std::size_t j = 0; j < cols; ++j) s += bits[i * cols + j];
        return s;
    }
};

}  // namespace wskm

#endif  // WSKM_TAGS_HPP
