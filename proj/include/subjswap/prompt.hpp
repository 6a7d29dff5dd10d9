// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subjswap/backend.hpp"

namespace subjswap {

inline constexpr TokenId kPadToken = 0;
// Ids 1..kConceptSlots are reserved for <angle-bracketed> concept tokens.
inline constexpr int kConceptSlots = 15;

struct TokenSpan {
    int begin = 0;
    int end = 0;  // exclusive

    int size() const { return end - begin; }
    bool operator==(const TokenSpan&) const = default;
};

// Token ids padded to a fixed length, plus where the subject sits.
struct PromptSpec {
    std::vector<TokenId> tokens;
    int length = 0;  // non-pad tokens
    TokenSpan subject;

    void validate() const;
    bool operator==(const PromptSpec&) const = default;
};

// Deterministic word-level tokenizer: words hash into the vocabulary,
// <angle-bracketed> words into the reserved concept range.
class Tokenizer {
public:
    explicit Tokenizer(int vocab_size = 256, int max_length = 8);

    int vocab_size() const { return m_vocab_size; }
    int max_length() const { return m_max_length; }

    static std::vector<std::string> split(std::string_view text);
    TokenId token_id(std::string_view word) const;
    std::vector<TokenId> encode(std::string_view text) const;
    std::vector<TokenId> padded(std::string_view text) const;
    std::vector<TokenId> empty_prompt() const;

    // Subject may span several words; it must occur in the text.
    PromptSpec prompt(std::string_view text, std::string_view subject) const;
    // Fills the template's "{}" with the word.
    std::vector<TokenId> from_template(std::string_view prompt_template, std::string_view word) const;

private:
    int m_vocab_size;
    int m_max_length;
};

// Replaces the subject span with the concept tokens and re-pads to the same
// fixed length.
PromptSpec build_target_prompt(const PromptSpec& source, std::span<const TokenId> concept_tokens);

}  // namespace subjswap
