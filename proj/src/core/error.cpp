#include "radmark/error.hpp"

namespace radmark {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::contract: return "contract";
    case ErrorKind::ingestion: return "ingestion";
    case ErrorKind::validation: return "validation";
    case ErrorKind::backend: return "backend";
    case ErrorKind::service: return "service";
    }
    return "unknown";
}

} // namespace radmark
