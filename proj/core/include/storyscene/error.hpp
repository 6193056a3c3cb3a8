// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace storyscene {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };
class PreconditionError : public Error { public: using Error::Error; };
class NumericError : public Error { public: using Error::Error; };
class InputError : public Error { public: using Error::Error; };
class ContractError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class InternalError : public Error { public: using Error::Error; };

// Transport failures keep the raw response body for diagnostics.
class TransportError : public Error {
public:
    TransportError(const std::string& what, std::string raw_body = {})
        : Error(what), raw_body_(std::move(raw_body)) {}
    const std::string& raw_body() const noexcept { return raw_body_; }

private:
    std::string raw_body_;
};

class PlanningError : public Error {
public:
    PlanningError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string transcript)
        : Error(what), transcript_(std::move(transcript)) {}
    const std::string& transcript() const noexcept { return transcript_; }

private:
    std::string transcript_;
};

class JudgingError : public Error { public: using Error::Error; };

// Raised by the sampler; carries the countdown timestep and, for joint
// calls, the pair of story indices that failed.
class GenerationError : public Error {
public:
    GenerationError(const std::string& what, int timestep, int story_a = -1, int story_b = -1)
        : Error(what), timestep_(timestep), story_a_(story_a), story_b_(story_b) {}
    int timestep() const noexcept { return timestep_; }
    int story_a() const noexcept { return story_a_; }
    int story_b() const noexcept { return story_b_; }

private:
    int timestep_;
    int story_a_;
    int story_b_;
};

}  // namespace storyscene
