// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/eval.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace funcloc {

struct ChatEndpoint {
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string api_key_env;  // name of the variable holding the key
    std::size_t max_in_flight = 4;
    int timeout_s = 120;
    int max_retries = 2;

    friend bool operator==(const ChatEndpoint&, const ChatEndpoint&) = default;
};

struct EmbeddingEndpoint {
    std::string base_url;
    std::size_t max_in_flight = 4;
    int timeout_s = 120;
    std::size_t batch_size = 32;

    friend bool operator==(const EmbeddingEndpoint&, const EmbeddingEndpoint&) = default;
};

/// Everything a CLI run needs. Loaded from JSON (schema in
/// docs/config.schema.json) and then overridden by flags.
struct RunConfig {
    eval::PipelineConfig pipeline;
    ChatEndpoint chat;
    EmbeddingEndpoint embedding;
    std::string chat_cache;       // empty: <out-dir>/cache/chat.jsonl
    std::string embedding_cache;  // empty: <out-dir>/cache/embeddings.jsonl
    std::size_t workers = 1;
    std::uint64_t seed = 42;
    bool mock_providers = false;

    /// Throws InvalidConfig.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Relative cache paths resolve against `base_dir`. An inline "api_key"
/// anywhere in the document is rejected.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Echo for manifests. Carries environment variable names, never values.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Reads the chat API key from the configured environment variable. Empty
/// when no variable is configured; throws InvalidConfig when it is unset.
std::string chat_api_key(const RunConfig& config);

}  // namespace funcloc
