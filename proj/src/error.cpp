#include "masbus/error.hpp"

namespace masbus {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::MissingScheme: return "MissingScheme";
        case Errc::BadScheme: return "BadScheme";
        case Errc::BadParam: return "BadParam";
        case Errc::DuplicateParamKey: return "DuplicateParamKey";
        case Errc::DuplicateScheme: return "DuplicateScheme";
        case Errc::BusRunning: return "BusRunning";
        case Errc::UnknownScheme: return "UnknownScheme";
        case Errc::DuplicateRouteId: return "DuplicateRouteId";
        case Errc::UnknownTransform: return "UnknownTransform";
        case Errc::UnknownRoute: return "UnknownRoute";
        case Errc::InvalidRoute: return "InvalidRoute";
        case Errc::AlreadyRunning: return "AlreadyRunning";
        case Errc::AlreadyStopped: return "AlreadyStopped";
        case Errc::RouteNotRunning: return "RouteNotRunning";
        case Errc::TransformFailure: return "TransformFailure";
        case Errc::ProducerFailure: return "ProducerFailure";
        case Errc::Dropped: return "Dropped";
        case Errc::DuplicateName: return "DuplicateName";
        case Errc::UnknownReceiver: return "UnknownReceiver";
        case Errc::UnknownAgent: return "UnknownAgent";
        case Errc::NotLocalAgent: return "NotLocalAgent";
        case Errc::InvalidMessage: return "InvalidMessage";
        case Errc::UnknownPerformative: return "UnknownPerformative";
        case Errc::UnknownWorkspace: return "UnknownWorkspace";
        case Errc::UnknownArtifact: return "UnknownArtifact";
        case Errc::UnknownOperation: return "UnknownOperation";
        case Errc::OperationFailed: return "OperationFailed";
        case Errc::AlreadyAttached: return "AlreadyAttached";
        case Errc::MissingParam: return "MissingParam";
        case Errc::MissingArtifactName: return "MissingArtifactName";
        case Errc::MissingOperationName: return "MissingOperationName";
        case Errc::UnsupportedConsumer: return "UnsupportedConsumer";
        case Errc::UnsupportedProducer: return "UnsupportedProducer";
        case Errc::NoConsumer: return "NoConsumer";
        case Errc::BindFailure: return "BindFailure";
        case Errc::ConnectionRefused: return "ConnectionRefused";
        case Errc::HttpStatus: return "HttpStatus";
        case Errc::XmlSyntax: return "XmlSyntax";
        case Errc::MissingFrom: return "MissingFrom";
        case Errc::MissingTo: return "MissingTo";
        case Errc::DuplicateFrom: return "DuplicateFrom";
        case Errc::UnknownElement: return "UnknownElement";
        case Errc::UnknownAttribute: return "UnknownAttribute";
        case Errc::MissingAttribute: return "MissingAttribute";
        case Errc::UnexpectedText: return "UnexpectedText";
        case Errc::BadUri: return "BadUri";
        case Errc::OrderViolation: return "OrderViolation";
        case Errc::Incomplete: return "Incomplete";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::StageTimeout: return "StageTimeout";
    }
    return "Unknown";
}

namespace {

std::string decorate(Errc code, const std::string& message) {
    std::string out{to_string(code)};
    if (!message.empty()) {
        out += ": ";
        out += message;
    }
    return out;
}

}  // namespace

Error::Error(Errc code, std::string message, std::string detail)
    : std::runtime_error(decorate(code, message)), code_(code), detail_(std::move(detail)) {}

Error::Error(Errc code, std::string message, SourceLocation where)
    : std::runtime_error("line " + std::to_string(where.line) + ", column " +
                         std::to_string(where.column) + ": " + decorate(code, message)),
      code_(code),
      where_(where) {}

Error Error::at_position(Errc code, std::string message, std::size_t pos) {
    Error e(code, message + " at offset " + std::to_string(pos));
    e.position_ = pos;
    return e;
}

}  // namespace masbus
