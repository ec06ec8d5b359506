#include "radmark/labels/split.hpp"

#include "radmark/core/rng.hpp"
#include "radmark/error.hpp"
#include "radmark/io/files.hpp"

#include <charconv>
#include <numeric>
#include <set>
#include <sstream>

namespace radmark {

namespace {

std::size_t parse_count(std::string_view tok, std::string_view context) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ConfigError(std::string(context) + ": bad count '" + std::string(tok) + "'");
    }
    return v;
}

} // namespace

SplitCounts parse_split_counts(std::string_view text) {
    std::vector<std::size_t> parts;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        parts.push_back(parse_count(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos),
                                    "split counts"));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (parts.size() != 3) {
        throw ConfigError("split counts must be 'train,val,test', got '" + std::string(text) + "'");
    }
    return {parts[0], parts[1], parts[2]};
}

Split SplitAssignment::split_of(std::string_view id) const {
    for (const auto& [eid, split] : entries) {
        if (eid == id) return split;
    }
    return Split::unassigned;
}

std::vector<std::string> SplitAssignment::ids_in(Split split) const {
    std::vector<std::string> out;
    for (const auto& [id, s] : entries) {
        if (s == split) out.push_back(id);
    }
    return out;
}

SplitAssignment split_dataset(const std::vector<std::string>& ids, SplitCounts counts, std::uint64_t seed) {
    if (counts.total() != ids.size()) {
        throw ConfigError("split counts " + std::to_string(counts.train) + "," + std::to_string(counts.val) + "," +
                          std::to_string(counts.test) + " sum to " + std::to_string(counts.total()) + " but there are " +
                          std::to_string(ids.size()) + " images");
    }
    if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
        throw ConfigError("split: image ids are not unique");
    }
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, "split");
    shuffle(order, rng);

    std::vector<Split> assigned(ids.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        assigned[order[rank]] = rank < counts.train                ? Split::train
                                : rank < counts.train + counts.val ? Split::val
                                                                   : Split::test;
    }
    SplitAssignment out{seed, counts, {}};
    out.entries.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.entries.emplace_back(ids[i], assigned[i]);
    return out;
}

std::string format_split_manifest(const SplitAssignment& a) {
    std::ostringstream os;
    os << "# radmark split manifest v1\n"
       << "# seed " << a.seed << "\n"
       << "# counts train=" << a.counts.train << " val=" << a.counts.val << " test=" << a.counts.test << "\n";
    for (const auto& [id, split] : a.entries) os << id << ' ' << to_string(split) << '\n';
    return os.str();
}

SplitAssignment parse_split_manifest(std::string_view text) {
    SplitAssignment out;
    bool have_seed = false, have_counts = false;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto where = "split manifest line " + std::to_string(line_no);
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "seed") {
                std::string v;
                ls >> v;
                std::uint64_t seed = 0;
                const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
                if (v.empty() || ec != std::errc() || p != v.data() + v.size()) throw ConfigError(where + ": bad seed");
                out.seed = seed;
                have_seed = true;
            } else if (key == "counts") {
                std::string t;
                while (ls >> t) {
                    const auto eq = t.find('=');
                    if (eq == std::string::npos) throw ConfigError(where + ": bad counts field '" + t + "'");
                    const auto n = parse_count(std::string_view(t).substr(eq + 1), where);
                    const auto name = t.substr(0, eq);
                    if (name == "train") out.counts.train = n;
                    else if (name == "val") out.counts.val = n;
                    else if (name == "test") out.counts.test = n;
                    else throw ConfigError(where + ": unknown split '" + name + "'");
                }
                have_counts = true;
            }
            continue;
        }
        std::string id, split_text, extra;
        ls >> id >> split_text;
        if (id.empty() || split_text.empty() || (ls >> extra)) {
            throw ConfigError(where + ": expected '<image_id> <split>'");
        }
        const auto split = parse_split(split_text);
        if (!split) throw ConfigError(where + ": unknown split '" + split_text + "'");
        out.entries.emplace_back(id, *split);
    }
    if (!have_seed || !have_counts) {
        throw ConfigError("split manifest: missing seed or counts header");
    }
    return out;
}

SplitAssignment load_split_manifest(const std::filesystem::path& path) {
    return parse_split_manifest(read_text_file(path));
}

} // namespace radmark
