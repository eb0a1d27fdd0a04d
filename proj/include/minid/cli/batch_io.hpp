#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "minid/batch.hpp"

namespace minid::cli {

enum class BatchFormat { csv, jsonl };

BatchFormat parse_format(const std::string& name);

// Shortest decimal that reads back to the same double; "+inf" / "-inf" for
// infinities.
std::string format_double(double x);

void write_csv(const SampleBatch& batch, std::ostream& out);
void write_jsonl(const SampleBatch& batch, std::ostream& out);
// Writes the batch and its sidecar `<path>.meta.json`. Throws Error naming
// the path on I/O failure.
void write_batch(const SampleBatch& batch, const std::string& path, BatchFormat format);
std::string batch_meta_json(const SampleBatch& batch);

// Inverse of write_csv; metadata is not restored.
SampleBatch read_csv(std::istream& in);
SampleBatch read_csv_file(const std::string& path);

}  // namespace minid::cli
