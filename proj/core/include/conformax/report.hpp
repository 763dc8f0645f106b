#pragma once

#include <string>
#include <vector>

namespace conformax {

/// The shipped report schema (same content as docs/report-schema.json).
/// Grammar: an object mirrors the report structure; leaves are the type
/// names "number" | "integer" | "string" | "boolean"; a one-element array
/// describes arrays of that element shape. Every schema key is required and
/// unknown report keys are rejected.
const std::string& report_schema_text();

/// Violations of `schema_text` by `document_text`, empty when valid.
/// Throws Error when either input is not JSON.
std::vector<std::string> schema_violations(const std::string& document_text,
                                           const std::string& schema_text);

/// Validate a report file against the shipped schema; throws Error listing
/// the violations if any.
void validate_report_file(const std::string& report_path);

}  // namespace conformax
