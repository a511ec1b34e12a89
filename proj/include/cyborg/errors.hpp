#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cyborg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed YAML. line is 1-based, 0 when unknown.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& file, int line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_;
};

struct Diagnostic {
    std::string path;     // key path, e.g. "hosts.web1.image"
    std::string message;
};

inline std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += '\n';
        out += d.path + ": " + d.message;
    }
    return out;
}

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diags)
        : Error(format_diagnostics(diags)), diags_(std::move(diags)) {}
    ValidationError(const std::string& path, const std::string& message)
        : ValidationError(std::vector<Diagnostic>{{path, message}}) {}

    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

class InfeasibleError : public Error { public: using Error::Error; };
class UnknownAction : public Error { public: using Error::Error; };
class WrongTeam : public Error { public: using Error::Error; };
class UnknownSession : public Error { public: using Error::Error; };
class MalformedTarget : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };
class StaleEpisodeError : public Error { public: using Error::Error; };
class EmptyMask : public Error { public: using Error::Error; };
class NonFiniteLoss : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class MalformedLog : public Error { public: using Error::Error; };

}  // namespace cyborg
