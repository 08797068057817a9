#include "tmpc/records.hpp"

#include <array>
#include <nlohmann/json.hpp>

#include "tmpc/errors.hpp"
#include "tmpc/rng.hpp"

namespace tmpc {

using nlohmann::json;

std::string payload_digest(const std::string& payload) {
    const std::uint64_t h = hash_bytes(payload);
    static constexpr std::array<char, 16> hex = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                 '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) {
        out[15 - i] = hex[(h >> (4 * i)) & 0xF];
    }
    return out;
}

std::string to_json_line(const RunRecord& record) {
    // nlohmann::json keeps keys sorted, which makes serialized traces stable.
    json snapshot = json::array();
    for (const BufferEntrySnapshot& entry : record.buffer_snapshot) {
        snapshot.push_back(json{{"payload_digest", entry.payload_digest},
                                {"score", entry.score}});
    }
    const json doc{
        {"run_id", record.run_id},
        {"prompt_id", record.prompt_id},
        {"method", record.method},
        {"event", record.event},
        {"iteration", record.iteration},
        {"rollout_index", record.rollout_index},
        {"total_score", record.total_score},
        {"segment_scores", record.segment_scores},
        {"buffer_snapshot", snapshot},
        {"wall_time_ms", record.wall_time_ms},
        {"seed", record.seed},
    };
    return doc.dump();
}

RunRecord record_from_json_line(const std::string& line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::exception& e) {
        throw MalformedBodyError(std::string("record_from_json_line: bad JSON: ") + e.what());
    }
    try {
        RunRecord record;
        record.run_id = doc.at("run_id").get<std::string>();
        record.prompt_id = doc.at("prompt_id").get<std::string>();
        record.method = doc.at("method").get<std::string>();
        record.event = doc.at("event").get<std::string>();
        record.iteration = doc.at("iteration").get<std::size_t>();
        record.rollout_index = doc.at("rollout_index").get<std::size_t>();
        record.total_score = doc.at("total_score").get<double>();
        record.segment_scores = doc.at("segment_scores").get<std::vector<double>>();
        for (const auto& entry : doc.at("buffer_snapshot")) {
            record.buffer_snapshot.push_back(
                BufferEntrySnapshot{entry.at("payload_digest").get<std::string>(),
                                    entry.at("score").get<double>()});
        }
        record.wall_time_ms = doc.at("wall_time_ms").get<std::int64_t>();
        record.seed = doc.at("seed").get<std::uint64_t>();
        return record;
    } catch (const json::exception& e) {
        throw MalformedBodyError(std::string("record_from_json_line: missing field: ") +
                                 e.what());
    }
}

} // namespace tmpc
