#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "seqcode/feasibility.hpp"

namespace seqcode {

class InfeasibleConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PackingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientResults : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A_1..A_L, A_i of shape k_i x cols. Empty levels are 0 x cols.
struct SourceMatrices {
  std::vector<Eigen::MatrixXd> levels;
  int cols = 0;
};

// A_i cut into consecutive i-row blocks plus an optional short tail.
struct BlockSplit {
  int level = 0;
  std::vector<Eigen::MatrixXd> full_blocks;
  std::optional<Eigen::MatrixXd> remainder;
};

BlockSplit split_matrix(const Eigen::MatrixXd& a, int level);

// Systematic real MDS generator: identity on top of a Cauchy parity block.
// Every rows_in x rows_in submatrix of `coefficients` is invertible.
struct SystematicGenerator {
  int rows_in = 0;
  int rows_out = 0;
  Eigen::MatrixXd coefficients;  // rows_out x rows_in
};

SystematicGenerator make_generator(int rows_in, int rows_out);

// True iff every rows_in x rows_in row-submatrix of `gen` has full rank.
bool has_mds_property(const SystematicGenerator& gen);

// Provenance of one coded row held by a worker.
struct RowTag {
  int level = 0;      // 1-based i
  int block = 0;      // 1-based j; the remainder block is floor(k_i/i)+1
  int coded_row = 0;  // 0-based row index within the block's generator
  bool remainder = false;

  bool systematic(int rows_in) const { return coded_row < rows_in; }
  friend bool operator==(const RowTag&, const RowTag&) = default;
};

struct WorkerMatrix {
  int worker_id = 0;  // 1-based
  Eigen::MatrixXd rows;
  std::vector<RowTag> tags;
};

struct WorkerResult {
  int worker_id = 0;
  Eigen::VectorXd y;
  std::vector<RowTag> tags;
};

// Where one coded row of a block ended up.
struct RowPlacement {
  int worker_id = 0;
  int slot = 0;  // row index inside that worker's matrix
};

struct BlockLayout {
  RowTag first;       // tag of coded row 0; level/block/remainder are shared by all rows
  int source_offset;  // first row of this block inside A_i
  SystematicGenerator generator;
  std::vector<RowPlacement> placements;  // indexed by coded row
};

// Worker matrices plus the metadata the user-side decoder needs.
struct EncodedSystem {
  Configuration config;
  int cols = 0;
  std::vector<WorkerMatrix> workers;
  std::vector<BlockLayout> blocks;  // ordered by level, then block index
};

// Splits, encodes and packs every level onto the workers. Throws
// InfeasibleConfiguration when the row budget is exceeded and PackingFailure
// when a remainder block cannot be placed within per-worker capacity.
EncodedSystem encode_all(const SourceMatrices& src, const Configuration& cfg);

// Same packing as encode_all without any matrix data; only layouts and tags.
EncodedSystem plan_layout(const Configuration& cfg);

WorkerResult worker_multiply(const WorkerMatrix& w, const Eigen::VectorXd& z);

// Recovers A_1 z, ..., A_l z from results of l distinct workers.
std::vector<Eigen::VectorXd> decode_prefix(std::span<const WorkerResult> results, const EncodedSystem& sys);

// Decodes only levels 1..max_level (max_level <= results.size()).
std::vector<Eigen::VectorXd> decode_prefix(std::span<const WorkerResult> results, const EncodedSystem& sys,
                                           int max_level);

// One CSV record per coded row:
// worker_id,level,block,coded_row,kind,coefficients
void write_provenance_csv(std::ostream& out, const EncodedSystem& sys);

// Relative error with denominator max(1, ||truth||_inf).
double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& truth);

}  // namespace seqcode
