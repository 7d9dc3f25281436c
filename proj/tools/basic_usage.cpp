// Compresses one synthetic document and prints what was kept.

#include <cstdio>

#include "tokcomp/datagen.hpp"
#include "tokcomp/multimodal.hpp"

int main() {
  tokcomp::GenSpec spec;
  spec.n_docs = 1;
  spec.seed = 7;
  const auto corpus = tokcomp::generate(spec);
  const auto& doc = corpus.front();

  tokcomp::PipelineConfig cfg;
  cfg.d = spec.d;
  const auto result = tokcomp::compress(tokcomp::validate_document(doc, cfg), cfg);

  std::printf("%s: kept %zu of %zu tokens (ratio %.3f), retention %.4f after %zu controller steps\n",
              doc.id.c_str(), result.kept.size(), doc.size(), result.kept_ratio, result.retention,
              result.controller_steps);
  for (std::size_t i : result.kept) std::printf("%s ", doc.tokens[i].text.c_str());
  std::printf("\n");
}
