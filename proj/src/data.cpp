#include "logan/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "logan/errors.hpp"
#include "logan/proposals.hpp"
#include "logan/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace logan {

// --- feature files ------------------------------------------------------------

namespace {

constexpr char kFeatureMagic[4] = {'L', 'G', 'F', 'V'};
constexpr std::uint32_t kFeatureVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

std::uint32_t get_u32(const std::string& data, std::size_t& pos, const char* what,
                      const std::string& path) {
    if (pos + 4 > data.size())
        throw FormatError(path + ": truncated reading " + what + " at byte offset " +
                          std::to_string(pos));
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

void save_features(const std::string& path, const VideoFeatures& video) {
    std::string buf;
    buf.append(kFeatureMagic, 4);
    put_u32(buf, kFeatureVersion);
    put_u32(buf, static_cast<std::uint32_t>(video.frame_count));
    put_u32(buf, static_cast<std::uint32_t>(video.feature_dim));
    for (double v : video.features) put_f32(buf, static_cast<float>(v));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write feature file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("short write: " + path);
}

VideoFeatures load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open feature file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 4 || std::memcmp(data.data(), kFeatureMagic, 4) != 0)
        throw FormatError(path + ": bad feature-file magic at byte offset 0");
    std::size_t pos = 4;
    const std::uint32_t version = get_u32(data, pos, "version", path);
    if (version != kFeatureVersion)
        throw FormatError(path + ": unsupported feature-file version " +
                          std::to_string(version));
    const std::uint32_t n = get_u32(data, pos, "frame count", path);
    const std::uint32_t d = get_u32(data, pos, "feature dim", path);
    if (n < 1 || d < 1)
        throw FormatError(path + ": degenerate header dims " + std::to_string(n) + "x" +
                          std::to_string(d));
    const std::size_t want = static_cast<std::size_t>(n) * d * 4;
    if (data.size() - pos != want)
        throw FormatError(path + ": payload is " + std::to_string(data.size() - pos) +
                          " bytes at byte offset " + std::to_string(pos) + ", header implies " +
                          std::to_string(want));

    VideoFeatures video;
    video.frame_count = n;
    video.feature_dim = d;
    video.features.resize(static_cast<std::size_t>(n) * d);
    for (std::size_t i = 0; i < video.features.size(); ++i) {
        std::uint32_t bits = get_u32(data, pos, "payload", path);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f))
            throw DataError(path + ": non-finite value in row " +
                            std::to_string(i / d));
        video.features[i] = static_cast<double>(f);
    }
    video.frame_positions.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) video.frame_positions[i] = i;
    return video;
}

// --- vocabulary -----------------------------------------------------------------

std::int64_t Vocabulary::id_of(const std::string& token, const std::string& query_id) const {
    auto it = index.find(token);
    if (it == index.end())
        throw DataError("query " + query_id + ": token '" + token + "' not in vocabulary");
    return it->second;
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open vocabulary: " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.index.emplace(line, static_cast<std::int64_t>(vocab.tokens.size()));
        vocab.tokens.push_back(line);
    }
    if (vocab.tokens.empty()) throw DataError("empty vocabulary: " + path);
    return vocab;
}

void save_vocabulary(const std::string& path, const std::vector<std::string>& tokens) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write vocabulary: " + path);
    for (const auto& t : tokens) out << t << '\n';
}

// --- manifests --------------------------------------------------------------------

namespace {

ProposalScheme scheme_from_json(const ordered_json& j) {
    ProposalScheme scheme;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "unit_spans") {
        scheme.kind = ProposalKind::unit_spans;
        scheme.unit_count = j.value("unit_count", 6);
    } else if (kind == "fixed_windows") {
        scheme.kind = ProposalKind::fixed_windows;
        for (const auto& s : j.at("window_sizes"))
            scheme.window_sizes.push_back(s.get<std::int64_t>());
    } else {
        throw DataError("unknown proposal scheme kind: " + kind);
    }
    scheme.seconds_per_unit = j.value("seconds_per_unit", 1.0);
    if (scheme.seconds_per_unit <= 0.0)
        throw DataError("seconds_per_unit must be positive");
    return scheme;
}

ordered_json scheme_to_json(const ProposalScheme& scheme) {
    ordered_json j;
    if (scheme.kind == ProposalKind::unit_spans) {
        j["kind"] = "unit_spans";
        j["unit_count"] = scheme.unit_count;
    } else {
        j["kind"] = "fixed_windows";
        j["window_sizes"] = scheme.window_sizes;
    }
    j["seconds_per_unit"] = scheme.seconds_per_unit;
    return j;
}

constexpr std::int64_t kMaxQueryLen = 128;

}  // namespace

DatasetManifest load_manifest(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw FormatError("manifest " + path + ": " + e.what());
    }

    DatasetManifest m;
    m.name = j.value("name", "dataset");
    m.split = j.at("split").get<std::string>();
    if (m.split != "train" && m.split != "val" && m.split != "test")
        throw DataError("manifest " + path + ": unknown split '" + m.split + "'");
    m.scheme = scheme_from_json(j.at("scheme"));

    std::unordered_map<std::string, std::int64_t> unit_counts;
    for (const auto& v : j.at("videos")) {
        ManifestVideo video;
        video.video_id = v.at("video_id").get<std::string>();
        video.feature_path = v.at("feature_path").get<std::string>();
        video.unit_count = v.at("unit_count").get<std::int64_t>();
        if (video.unit_count < 1)
            throw DataError("video " + video.video_id + ": unit_count must be >= 1");
        if (!unit_counts.emplace(video.video_id, video.unit_count).second)
            throw DataError("duplicate video id: " + video.video_id);
        m.videos.push_back(std::move(video));
    }

    const bool gt_required = m.split != "train";
    for (const auto& q : j.at("queries")) {
        QueryTokens query;
        query.query_id = q.at("query_id").get<std::string>();
        query.video_id = q.at("video_id").get<std::string>();
        if (!unit_counts.count(query.video_id))
            throw DataError("query " + query.query_id + " references unknown video " +
                            query.video_id);
        if (q.contains("text")) query.raw_text = q["text"].get<std::string>();
        for (const auto& tok : q.at("tokens"))
            query.tokens.push_back(vocab.id_of(tok.get<std::string>(), query.query_id));
        if (query.tokens.empty() ||
            static_cast<std::int64_t>(query.tokens.size()) > kMaxQueryLen)
            throw DataError("query " + query.query_id + ": token count out of range");
        if (q.contains("gt_span")) {
            const auto& span = q["gt_span"];
            TimeSpan ts{span.at(0).get<double>(), span.at(1).get<double>()};
            if (ts.start_sec < 0.0 || ts.start_sec >= ts.end_sec)
                throw DataError("query " + query.query_id + ": invalid gt_span");
            query.gt_span = ts;
        } else if (gt_required) {
            throw DataError("query " + query.query_id + ": gt_span required for split " +
                            m.split);
        }
        m.queries.push_back(std::move(query));
    }
    return m;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest,
                   const Vocabulary& vocab) {
    ordered_json j;
    j["name"] = manifest.name;
    j["split"] = manifest.split;
    j["scheme"] = scheme_to_json(manifest.scheme);
    j["videos"] = ordered_json::array();
    for (const auto& v : manifest.videos) {
        ordered_json jv;
        jv["video_id"] = v.video_id;
        jv["feature_path"] = v.feature_path;
        jv["unit_count"] = v.unit_count;
        j["videos"].push_back(std::move(jv));
    }
    j["queries"] = ordered_json::array();
    for (const auto& q : manifest.queries) {
        ordered_json jq;
        jq["query_id"] = q.query_id;
        jq["video_id"] = q.video_id;
        ordered_json toks = ordered_json::array();
        for (auto id : q.tokens) {
            if (id < 0 || id >= vocab.size())
                throw DataError("query " + q.query_id + ": token id out of vocabulary");
            toks.push_back(vocab.tokens[static_cast<std::size_t>(id)]);
        }
        jq["tokens"] = std::move(toks);
        if (!q.raw_text.empty()) jq["text"] = q.raw_text;
        if (q.gt_span) jq["gt_span"] = {q.gt_span->start_sec, q.gt_span->end_sec};
        j["queries"].push_back(std::move(jq));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

const VideoFeatures& Dataset::video_of(const QueryTokens& query) const {
    auto it = video_index.find(query.video_id);
    if (it == video_index.end())
        throw DataError("query " + query.query_id + " references unknown video " +
                        query.video_id);
    return videos[it->second];
}

Dataset load_dataset(const std::string& manifest_path, const Vocabulary& vocab) {
    Dataset ds;
    ds.manifest = load_manifest(manifest_path, vocab);
    const fs::path base = fs::path(manifest_path).parent_path();

    ds.videos.reserve(ds.manifest.videos.size());
    for (const auto& mv : ds.manifest.videos) {
        fs::path p = mv.feature_path;
        if (p.is_relative()) p = base / p;
        VideoFeatures video = load_features(p.string());
        if (video.frame_count != mv.unit_count)
            throw DataError("video " + mv.video_id + ": manifest unit_count " +
                            std::to_string(mv.unit_count) + " != feature rows " +
                            std::to_string(video.frame_count));
        video.video_id = mv.video_id;
        video.seconds_per_unit = ds.manifest.scheme.seconds_per_unit;
        ds.video_index.emplace(mv.video_id, ds.videos.size());
        ds.videos.push_back(std::move(video));
    }
    ds.queries_by_video.resize(ds.videos.size());
    for (std::size_t qi = 0; qi < ds.manifest.queries.size(); ++qi) {
        const auto& q = ds.manifest.queries[qi];
        ds.queries_by_video[ds.video_index.at(q.video_id)].push_back(qi);
    }
    return ds;
}

// --- synthetic corpus ----------------------------------------------------------

namespace {

std::string pad4(std::int64_t v) {
    std::ostringstream os;
    os << v;
    std::string s = os.str();
    while (s.size() < 4) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

void generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    if (spec.concept_count < 1 || spec.concept_count > spec.vocab_size)
        throw ConfigError("synthetic: need 1 <= concept_count <= vocab_size");
    if (spec.noise_sigma < 0.0) throw ConfigError("synthetic: noise_sigma must be >= 0");
    if (spec.words_per_query < 1 || spec.words_per_query > spec.frames_per_video)
        throw ConfigError("synthetic: words_per_query must be in [1, frames_per_video]");
    if (spec.feature_dim < 1) throw ConfigError("synthetic: feature_dim must be >= 1");
    if (spec.videos_train < 2 || spec.videos_val < 1 || spec.videos_test < 1)
        throw ConfigError("synthetic: need >= 2 train and >= 1 val/test videos");

    fs::create_directories(fs::path(out_dir) / "features");

    Vocabulary vocab;
    for (std::int64_t i = 0; i < spec.vocab_size; ++i) {
        vocab.index.emplace("c" + std::to_string(i), i);
        vocab.tokens.push_back("c" + std::to_string(i));
    }
    const auto& tokens = vocab.tokens;
    save_vocabulary((fs::path(out_dir) / "vocab.txt").string(), tokens);

    Rng rng(spec.seed);

    // Unit concept vectors; nearly orthogonal at moderate feature_dim.
    const std::int64_t d = spec.feature_dim;
    std::vector<std::vector<double>> concepts(static_cast<std::size_t>(spec.concept_count));
    for (auto& c : concepts) {
        c.resize(static_cast<std::size_t>(d));
        double norm2 = 0.0;
        for (auto& x : c) {
            x = rng.normal();
            norm2 += x * x;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& x : c) x *= inv;
    }
    {
        VideoFeatures concept_mat;
        concept_mat.video_id = "concepts";
        concept_mat.frame_count = spec.concept_count;
        concept_mat.feature_dim = d;
        for (const auto& c : concepts)
            concept_mat.features.insert(concept_mat.features.end(), c.begin(), c.end());
        save_features((fs::path(out_dir) / "concepts.lgfv").string(), concept_mat);
    }

    const std::int64_t n = spec.frames_per_video;
    const std::int64_t w = spec.words_per_query;
    const std::int64_t aligned_starts = (n - w) / w + 1;

    const struct {
        const char* split;
        std::int64_t count;
    } splits[] = {{"train", spec.videos_train}, {"val", spec.videos_val},
                  {"test", spec.videos_test}};

    for (const auto& sp : splits) {
        DatasetManifest manifest;
        manifest.name = "synthetic";
        manifest.split = sp.split;
        manifest.scheme.kind = ProposalKind::fixed_windows;
        manifest.scheme.window_sizes = {w};
        manifest.scheme.seconds_per_unit = 1.0;

        // First half of the concepts can be queried, second half is
        // background filler. Off-span frames never carry query-able content,
        // so raising the bag similarity genuinely requires aligning query
        // words with their planted frames (and localization follows); with a
        // shared pool the triplet negatives punish content matching itself.
        const std::int64_t query_pool =
            spec.concept_count >= 2 ? spec.concept_count / 2 : spec.concept_count;

        for (std::int64_t v = 0; v < sp.count; ++v) {
            const std::string video_id = std::string(sp.split) + "_v" + pad4(v);

            const std::int64_t start =
                static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(aligned_starts))) * w;
            std::vector<std::int64_t> query_concepts(static_cast<std::size_t>(w));
            for (auto& c : query_concepts)
                c = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(query_pool)));

            std::vector<std::int64_t> off_span_pool;
            {
                std::vector<bool> used(static_cast<std::size_t>(spec.concept_count), false);
                for (auto c : query_concepts) used[static_cast<std::size_t>(c)] = true;
                for (std::int64_t c = query_pool; c < spec.concept_count; ++c)
                    if (!used[static_cast<std::size_t>(c)]) off_span_pool.push_back(c);
                // Degenerate specs (no background headroom) fall back to any
                // non-query concept, then to the full pool; the planted span
                // is then not guaranteed unique, which
                // `verify_planted_alignment` will surface.
                if (off_span_pool.empty())
                    for (std::int64_t c = 0; c < spec.concept_count; ++c)
                        if (!used[static_cast<std::size_t>(c)]) off_span_pool.push_back(c);
                if (off_span_pool.empty())
                    for (std::int64_t c = 0; c < spec.concept_count; ++c) off_span_pool.push_back(c);
            }

            std::vector<std::int64_t> frame_concepts(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) {
                if (i >= start && i < start + w)
                    frame_concepts[static_cast<std::size_t>(i)] =
                        query_concepts[static_cast<std::size_t>(i - start)];
                else
                    frame_concepts[static_cast<std::size_t>(i)] =
                        off_span_pool[rng.below(off_span_pool.size())];
            }

            VideoFeatures video;
            video.video_id = video_id;
            video.frame_count = n;
            video.feature_dim = d;
            video.features.resize(static_cast<std::size_t>(n * d));
            for (std::int64_t i = 0; i < n; ++i) {
                const auto& base = concepts[static_cast<std::size_t>(
                    frame_concepts[static_cast<std::size_t>(i)])];
                for (std::int64_t j = 0; j < d; ++j)
                    video.features[static_cast<std::size_t>(i * d + j)] =
                        base[static_cast<std::size_t>(j)] + spec.noise_sigma * rng.normal();
            }
            const std::string rel_path = "features/" + video_id + ".lgfv";
            save_features((fs::path(out_dir) / rel_path).string(), video);

            manifest.videos.push_back({video_id, rel_path, n});

            QueryTokens query;
            query.query_id = "q_" + video_id;
            query.video_id = video_id;
            query.tokens = query_concepts;  // token id == concept id
            std::ostringstream text;
            for (std::size_t i = 0; i < query_concepts.size(); ++i) {
                if (i) text << ' ';
                text << tokens[static_cast<std::size_t>(query_concepts[i])];
            }
            query.raw_text = text.str();
            query.gt_span = TimeSpan{static_cast<double>(start), static_cast<double>(start + w)};
            manifest.queries.push_back(std::move(query));
        }
        save_manifest((fs::path(out_dir) / (std::string(sp.split) + ".manifest.json")).string(),
                      manifest, vocab);
    }
}

PlantedCheck verify_planted_alignment(const std::string& out_dir, const std::string& split) {
    const Vocabulary vocab = load_vocabulary((fs::path(out_dir) / "vocab.txt").string());
    const Dataset ds =
        load_dataset((fs::path(out_dir) / (split + ".manifest.json")).string(), vocab);
    const VideoFeatures concepts =
        load_features((fs::path(out_dir) / "concepts.lgfv").string());

    PlantedCheck check;
    for (const auto& q : ds.manifest.queries) {
        if (!q.gt_span) continue;
        const VideoFeatures& video = ds.video_of(q);
        ++check.queries;

        // Decode every frame to its nearest concept.
        std::vector<std::int64_t> decoded(static_cast<std::size_t>(video.frame_count));
        for (std::int64_t i = 0; i < video.frame_count; ++i) {
            double best = 0.0;
            std::int64_t best_c = -1;
            for (std::int64_t c = 0; c < concepts.frame_count; ++c) {
                double dist = 0.0;
                for (std::int64_t j = 0; j < video.feature_dim; ++j) {
                    const double diff = video.row(i)[j] - concepts.row(c)[j];
                    dist += diff * diff;
                }
                if (best_c < 0 || dist < best) {
                    best = dist;
                    best_c = c;
                }
            }
            decoded[static_cast<std::size_t>(i)] = best_c;
        }

        // Slide the query's concept sequence over the decoded frames.
        std::vector<std::int64_t> matches;
        const std::int64_t w = static_cast<std::int64_t>(q.tokens.size());
        for (std::int64_t s = 0; s + w <= video.frame_count; ++s) {
            bool ok = true;
            for (std::int64_t k = 0; k < w && ok; ++k)
                ok = decoded[static_cast<std::size_t>(s + k)] ==
                     q.tokens[static_cast<std::size_t>(k)];
            if (ok) matches.push_back(s);
        }

        const double spu = video.seconds_per_unit;
        const std::int64_t gt_start =
            static_cast<std::int64_t>(std::llround(q.gt_span->start_sec / spu));
        if (matches.size() == 1 && matches[0] == gt_start) ++check.recovered;
        if (!matches.empty()) {
            SegmentSpan predicted = make_span(matches[0], matches[0] + w, spu);
            if (temporal_iou(predicted, *q.gt_span) >= 0.5) check.rank1_recall_at_half += 1.0;
        }
    }
    if (check.queries > 0) check.rank1_recall_at_half /= static_cast<double>(check.queries);
    return check;
}

// --- batching --------------------------------------------------------------------

std::vector<std::vector<BatchPair>> epoch_batches(const Dataset& dataset, int batch_videos,
                                                  std::uint64_t seed, std::int64_t epoch) {
    if (batch_videos < 2) throw ContractError("epoch_batches: batch_videos must be >= 2");
    if (dataset.videos.size() < 2)
        throw ContractError("epoch_batches: dataset has fewer than 2 videos");

    // splitmix-style epoch mixing keeps per-epoch streams independent.
    std::uint64_t mixed = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1);
    mixed ^= mixed >> 30;
    mixed *= 0xbf58476d1ce4e5b9ULL;
    mixed ^= mixed >> 27;
    Rng rng(mixed);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dataset.videos.size(); ++i)
        if (!dataset.queries_by_video[i].empty()) order.push_back(i);
    if (order.size() < 2)
        throw ContractError("epoch_batches: fewer than 2 videos have queries");
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }

    std::vector<std::vector<BatchPair>> batches;
    std::vector<BatchPair> current;
    for (std::size_t vi : order) {
        const auto& qs = dataset.queries_by_video[vi];
        const std::size_t pick = static_cast<std::size_t>(rng.below(qs.size()));
        current.push_back({vi, qs[pick]});
        if (current.size() == static_cast<std::size_t>(batch_videos)) {
            batches.push_back(std::move(current));
            current.clear();
        }
    }
    return batches;  // final short batch dropped
}

// --- hashing ----------------------------------------------------------------------

std::string fnv1a_hex(const void* data, std::size_t size) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file for hashing: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(data.data(), data.size());
}

}  // namespace logan
