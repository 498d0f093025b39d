#include "sisdmdp/model_io.hpp"

#include "sisdmdp/error.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <set>

namespace sisdmdp {

namespace {

constexpr std::array<const char*, 3> kSections{"header", "transitions", "rewards"};

// Best-effort diagnosis of a syntactically broken document: which top-level
// section was open when the text ended, and which never appeared.
std::string describe_truncation(std::string_view text) {
    int depth = 0;
    bool in_string = false, escape = false;
    std::string token, last_key;
    std::set<std::string> seen;
    bool pending_key = false;
    for (char c : text) {
        if (in_string) {
            if (escape) {
                escape = false;
            } else if (c == '\\') {
                escape = true;
            } else if (c == '"') {
                in_string = false;
                pending_key = depth == 1;
            } else {
                token.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_string = true;
            pending_key = false;
            token.clear();
            break;
        case ':':
            if (pending_key) {
                last_key = token;
                seen.insert(token);
            }
            pending_key = false;
            break;
        case '{':
        case '[':
            ++depth;
            pending_key = false;
            break;
        case '}':
        case ']':
            --depth;
            pending_key = false;
            break;
        case ' ':
        case '\n':
        case '\t':
        case '\r': break;
        default: pending_key = false; break;
        }
    }
    std::string msg = "truncated or malformed model document";
    if (!last_key.empty()) msg += ": section '" + last_key + "' is incomplete";
    std::string missing;
    for (const char* s : kSections)
        if (!seen.count(s)) missing += std::string(missing.empty() ? "" : ", ") + "'" + s + "'";
    if (!missing.empty()) msg += "; missing section(s) " + missing;
    return msg;
}

const nlohmann::json& section(const nlohmann::json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("model document is missing section '") + key + "'");
    return *it;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string serialize_model(const MdpModel& model) {
    const PartitionLayout& layout = model.layout();
    std::string out;
    out += "{\n  \"format\": \"sisdmdp-model\",\n  \"version\": 1,\n";
    out += "  \"header\": {\"n_states\": " + std::to_string(model.n_states()) +
           ", \"n_actions\": " + std::to_string(model.n_actions()) +
           ", \"K\": " + std::to_string(layout.n_partitions()) + ", \"partition_boundaries\": [";
    for (std::size_t i = 0; i < layout.boundaries().size(); ++i)
        out += (i ? ", " : "") + std::to_string(layout.boundaries()[i]);
    out += "]},\n  \"transitions\": [\n";
    for (std::size_t a = 0; a < model.n_actions(); ++a) {
        const SparseChain& p = model.transitions(a);
        out += "    [";
        bool first = true;
        for (std::size_t s = 0; s < p.n_states(); ++s) {
            if (p.row(s).empty()) continue;
            out += first ? "\n      " : ",\n      ";
            first = false;
            bool first_arc = true;
            for (const Arc& arc : p.row(s)) {
                out += first_arc ? "" : ", ";
                first_arc = false;
                out += "[" + std::to_string(s) + ", " + std::to_string(arc.target) + ", " + format_double(arc.prob) + "]";
            }
        }
        out += "\n    ]";
        out += a + 1 < model.n_actions() ? ",\n" : "\n";
    }
    out += "  ],\n  \"rewards\": [\n";
    for (std::size_t s = 0; s < model.n_states(); ++s) {
        out += "    [";
        for (std::size_t a = 0; a < model.n_actions(); ++a)
            out += (a ? ", " : "") + format_double(model.reward(s, a));
        out += s + 1 < model.n_states() ? "],\n" : "]\n";
    }
    out += "  ]\n}\n";
    return out;
}

MdpModel parse_model(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error&) {
        throw ParseError(describe_truncation(text));
    }
    if (!doc.is_object()) throw ParseError("model document must be a JSON object");

    try {
        const auto& header = section(doc, "header");
        const auto n = header.at("n_states").get<std::size_t>();
        const auto n_actions = header.at("n_actions").get<std::size_t>();
        const auto k = header.at("K").get<std::size_t>();
        auto boundaries = header.at("partition_boundaries").get<std::vector<std::size_t>>();
        if (boundaries.size() != k + 1 || boundaries.back() != n)
            throw ValidationError("partition_boundaries do not match K and n_states");
        PartitionLayout layout(std::move(boundaries));

        const auto& transitions = section(doc, "transitions");
        const auto& rewards = section(doc, "rewards");
        if (!transitions.is_array() || transitions.size() != n_actions)
            throw ValidationError("expected one transition list per action");
        if (!rewards.is_array() || rewards.size() != n)
            throw ValidationError("expected one reward row per state");
        for (const auto& row : rewards)
            if (!row.is_array() || row.size() != n_actions)
                throw ValidationError("expected one reward per action in every reward row");

        std::vector<SparseChain> actions;
        for (std::size_t a = 0; a < n_actions; ++a) {
            std::vector<std::vector<Arc>> rows(n);
            for (const auto& triplet : transitions[a]) {
                if (!triplet.is_array() || triplet.size() != 3)
                    throw ValidationError("transition entries must be [source, target, probability]");
                const auto src = triplet[0].get<std::size_t>();
                const auto dst = triplet[1].get<std::size_t>();
                if (src >= n || dst >= n) throw ValidationError("transition index out of range");
                rows[src].push_back({static_cast<state_t>(dst), triplet[2].get<double>()});
            }
            std::vector<double> r(n);
            for (std::size_t s = 0; s < n; ++s) r[s] = rewards[s][a].get<double>();
            actions.emplace_back(rows, std::move(r));
        }
        return MdpModel(std::move(actions), std::move(layout));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
}

} // namespace sisdmdp
