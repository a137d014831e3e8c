#ifndef NEGM_ERRORS_HPP
#define NEGM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace negm {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenomeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MutationExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AttackError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataFormatError : std::runtime_error {
    enum class Kind { BadMagic, Truncated, CountMismatch, RecordSize, Io, Parse };
    Kind kind;
    DataFormatError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

}  // namespace negm

#endif
