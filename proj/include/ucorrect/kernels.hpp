#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ucorrect/scorer.hpp"

// Hot loops of the pipeline. Every OpenMP kernel has a *_serial twin that is
// kept as the reference implementation for tests and benchmarks; both write
// results by index, so the outputs are bitwise identical.
namespace ucorrect::kernels {

// -ln p(t_i | mask at i). Unknown tokens score +infinity without a query.
double position_surprisal(const Scorer& scorer, const TokenSeq& seq, std::size_t i);

std::vector<double> surprisals_serial(const Scorer& scorer, const TokenSeq& seq);
std::vector<double> surprisals(const Scorer& scorer, const TokenSeq& seq);

// Surprisals of `edited`, which differs from the sentence behind `base` only at
// edited_index. With a bounded context radius only positions within that
// radius are requeried; otherwise this is a full recomputation.
std::vector<double> surprisals_after_edit(const Scorer& scorer, std::span<const double> base,
                                          const TokenSeq& edited, std::size_t edited_index);

// Index-order sum divided by n.
double mean(std::span<const double> values);

}  // namespace ucorrect::kernels
