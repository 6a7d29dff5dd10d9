// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "subjswap/error.hpp"

namespace subjswap {

namespace {

std::uint32_t fnv1a32(std::string_view text) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : text) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

bool is_concept_word(std::string_view word) {
    return word.size() >= 3 && word.front() == '<' && word.back() == '>';
}

}  // namespace

void PromptSpec::validate() const {
    require(length >= 0 && length <= static_cast<int>(tokens.size()), ErrorKind::length, "prompt length out of range");
    require(subject.begin >= 0 && subject.end <= length && subject.begin <= subject.end, ErrorKind::span,
            "subject span outside the prompt");
}

Tokenizer::Tokenizer(int vocab_size, int max_length) : m_vocab_size(vocab_size), m_max_length(max_length) {
    require(vocab_size > kConceptSlots + 1, ErrorKind::validation, "vocabulary too small for the reserved tokens");
    require(max_length >= 1, ErrorKind::validation, "max prompt length must be positive");
}

std::vector<std::string> Tokenizer::split(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        if (current.empty())
            return;
        if (!is_concept_word(current)) {
            while (!current.empty() && std::ispunct(static_cast<unsigned char>(current.back())))
                current.pop_back();
            std::transform(current.begin(), current.end(), current.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        }
        if (!current.empty())
            words.push_back(std::move(current));
        current.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            current.push_back(c);
    }
    flush();
    return words;
}

TokenId Tokenizer::token_id(std::string_view word) const {
    require(!word.empty(), ErrorKind::vocabulary, "empty word");
    const std::uint32_t h = fnv1a32(word);
    if (is_concept_word(word))
        return static_cast<TokenId>(1 + h % kConceptSlots);
    const auto regular = static_cast<std::uint32_t>(m_vocab_size - kConceptSlots - 1);
    return static_cast<TokenId>(kConceptSlots + 1 + h % regular);
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
    std::vector<TokenId> ids;
    for (const auto& word : split(text))
        ids.push_back(token_id(word));
    return ids;
}

std::vector<TokenId> Tokenizer::padded(std::string_view text) const {
    auto ids = encode(text);
    require(static_cast<int>(ids.size()) <= m_max_length, ErrorKind::length,
            "prompt has " + std::to_string(ids.size()) + " tokens, maximum is " + std::to_string(m_max_length));
    ids.resize(static_cast<std::size_t>(m_max_length), kPadToken);
    return ids;
}

std::vector<TokenId> Tokenizer::empty_prompt() const {
    return std::vector<TokenId>(static_cast<std::size_t>(m_max_length), kPadToken);
}

PromptSpec Tokenizer::prompt(std::string_view text, std::string_view subject) const {
    const auto words = encode(text);
    const auto subject_ids = encode(subject);
    require(!subject_ids.empty(), ErrorKind::span, "subject is empty");
    auto it = std::search(words.begin(), words.end(), subject_ids.begin(), subject_ids.end());
    require(it != words.end(), ErrorKind::span,
            "subject '" + std::string(subject) + "' does not occur in prompt '" + std::string(text) + "'");
    PromptSpec spec;
    spec.tokens = padded(text);
    spec.length = static_cast<int>(words.size());
    spec.subject.begin = static_cast<int>(it - words.begin());
    spec.subject.end = spec.subject.begin + static_cast<int>(subject_ids.size());
    return spec;
}

std::vector<TokenId> Tokenizer::from_template(std::string_view prompt_template, std::string_view word) const {
    std::string text(prompt_template);
    const auto pos = text.find("{}");
    require(pos != std::string::npos, ErrorKind::validation, "prompt template needs a {} placeholder");
    text.replace(pos, 2, word);
    return padded(text);
}

PromptSpec build_target_prompt(const PromptSpec& source, std::span<const TokenId> concept_tokens) {
    source.validate();
    require(source.subject.size() > 0, ErrorKind::span, "empty subject span");
    require(!concept_tokens.empty(), ErrorKind::span, "no concept tokens to substitute");
    const int new_length = source.length - source.subject.size() + static_cast<int>(concept_tokens.size());
    require(new_length <= static_cast<int>(source.tokens.size()), ErrorKind::length,
            "substituting the concept overflows the maximum prompt length of " +
                std::to_string(source.tokens.size()));

    PromptSpec target;
    target.tokens.assign(source.tokens.begin(), source.tokens.begin() + source.subject.begin);
    target.tokens.insert(target.tokens.end(), concept_tokens.begin(), concept_tokens.end());
    target.tokens.insert(target.tokens.end(), source.tokens.begin() + source.subject.end,
                         source.tokens.begin() + source.length);
    target.tokens.resize(source.tokens.size(), kPadToken);
    target.length = new_length;
    target.subject = {source.subject.begin, source.subject.begin + static_cast<int>(concept_tokens.size())};
    return target;
}

}  // namespace subjswap
