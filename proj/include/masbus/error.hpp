#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace masbus {

enum class Errc {
    // terms and URIs
    SyntaxError,
    EmptyInput,
    MissingScheme,
    BadScheme,
    BadParam,
    DuplicateParamKey,
    // bus
    DuplicateScheme,
    BusRunning,
    UnknownScheme,
    DuplicateRouteId,
    UnknownTransform,
    UnknownRoute,
    InvalidRoute,
    AlreadyRunning,
    AlreadyStopped,
    RouteNotRunning,
    TransformFailure,
    ProducerFailure,
    Dropped,
    // agents
    DuplicateName,
    UnknownReceiver,
    UnknownAgent,
    NotLocalAgent,
    InvalidMessage,
    UnknownPerformative,
    // environment
    UnknownWorkspace,
    UnknownArtifact,
    UnknownOperation,
    OperationFailed,
    AlreadyAttached,
    // components
    MissingParam,
    MissingArtifactName,
    MissingOperationName,
    UnsupportedConsumer,
    UnsupportedProducer,
    NoConsumer,
    BindFailure,
    ConnectionRefused,
    HttpStatus,
    // route config
    XmlSyntax,
    MissingFrom,
    MissingTo,
    DuplicateFrom,
    UnknownElement,
    UnknownAttribute,
    MissingAttribute,
    UnexpectedText,
    BadUri,
    OrderViolation,
    Incomplete,
    // scenario
    InvalidConfig,
    StageTimeout,
};

std::string_view to_string(Errc code);

struct SourceLocation {
    std::size_t line = 0;
    std::size_t column = 0;
};

/// The single exception type thrown by the library. `code()` is stable and
/// is what tests and the CLI branch on; `detail()` carries a short machine
/// readable reason (e.g. an operation's failure atom).
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, std::string detail = {});
    Error(Errc code, std::string message, SourceLocation where);

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::optional<SourceLocation>& location() const noexcept { return where_; }
    std::optional<std::size_t> position() const noexcept { return position_; }

    static Error at_position(Errc code, std::string message, std::size_t pos);

private:
    Errc code_;
    std::string detail_;
    std::optional<SourceLocation> where_;
    std::optional<std::size_t> position_;
};

}  // namespace masbus
