#pragma once

#include <stdexcept>
#include <string>

namespace ket {

// Error categories map onto CLI exit codes:
//   Config -> 2, Dependency -> 3, Gateway -> 4, Data -> 5.
enum class ErrorKind {
    Config,
    Dependency,
    Gateway,
    Data,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message),
          kind_(kind),
          code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Config: return 2;
            case ErrorKind::Dependency: return 3;
            case ErrorKind::Gateway: return 4;
            case ErrorKind::Data: return 5;
        }
        return 1;
    }

private:
    ErrorKind kind_;
    std::string code_;
};

#define KET_DEFINE_ERROR(Name, Kind)                          \
    class Name : public Error {                               \
    public:                                                   \
        explicit Name(const std::string& message)             \
            : Error(ErrorKind::Kind, #Name, message) {}       \
    }

KET_DEFINE_ERROR(ConfigError, Config);
KET_DEFINE_ERROR(DependencyError, Dependency);

KET_DEFINE_ERROR(GatewayError, Gateway);
KET_DEFINE_ERROR(ProtocolError, Gateway);

KET_DEFINE_ERROR(InputEmpty, Data);
KET_DEFINE_ERROR(NoSegments, Data);
KET_DEFINE_ERROR(FormatError, Data);
KET_DEFINE_ERROR(UnknownEntity, Data);
KET_DEFINE_ERROR(EmptySubgraph, Data);
KET_DEFINE_ERROR(EmptyReferenceSet, Data);
KET_DEFINE_ERROR(DuplicateId, Data);
KET_DEFINE_ERROR(EmptyTransform, Data);
KET_DEFINE_ERROR(ParseError, Data);
KET_DEFINE_ERROR(SumViolation, Data);
KET_DEFINE_ERROR(EscalationError, Data);
KET_DEFINE_ERROR(DegenerateVariance, Data);
KET_DEFINE_ERROR(ShapeError, Data);
KET_DEFINE_ERROR(FitDiverged, Data);
KET_DEFINE_ERROR(DegenerateLabels, Data);

#undef KET_DEFINE_ERROR

}  // namespace ket
