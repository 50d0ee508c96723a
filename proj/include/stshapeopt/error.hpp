/**
 * @brief Exception types shared by all modules.
 *
 * Every failure mode named in the public API maps to one class here so that
 * the CLI can translate it into an exit code without string matching.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace stshapeopt {

/** @brief Root of the library's exception hierarchy. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** @brief A point lies outside the image domain of a motion. */
class DomainError : public Error {
public:
    using Error::Error;
};

/** @brief Invalid scalar argument (negative magnitude, NaN, ...). */
class ArgumentError : public Error {
public:
    using Error::Error;
};

/** @brief Evaluation at a singular point (e.g. the origin for the Arkkio weight). */
class SingularityError : public Error {
public:
    using Error::Error;
};

/** @brief Invalid geometry: bad interfaces, trajectory leaving the mesh, empty annulus. */
class GeometryError : public Error {
public:
    using Error::Error;
};

/** @brief A mesh deformation produced a non-positive element area. */
class InvertedElementError : public GeometryError {
public:
    InvertedElementError(const std::string& what, int element)
        : GeometryError(what), element_(element) {}
    int element() const { return element_; }

private:
    int element_;
};

/** @brief Non-finite value produced during assembly. */
class AssemblyError : public Error {
public:
    AssemblyError(const std::string& what, int element)
        : Error(what), element_(element) {}
    int element() const { return element_; }

private:
    int element_;
};

/** @brief Linear solver failure (singular matrix, residual check failed). */
class SolverError : public Error {
public:
    using Error::Error;
};

/** @brief Newton iteration failed (damping underflow or iteration cap). */
class NonconvergenceError : public SolverError {
public:
    NonconvergenceError(const std::string& what, double last_residual)
        : SolverError(what), last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

/** @brief A formula is requested outside its domain of validity. */
class UnsupportedCaseError : public Error {
public:
    using Error::Error;
};

/** @brief Invalid run configuration or descent parameters. */
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/** @brief File-system failure (unwritable directory, unreadable file). */
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace stshapeopt
