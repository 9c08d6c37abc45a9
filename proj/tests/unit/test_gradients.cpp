#include <doctest.h>

#include "support/gradcheck.hpp"

using namespace gradcheck;

namespace {

void run(RefEmbedding e, std::uint64_t seed) {
  const TinyProblem problem;
  Model model(tiny_config(e), problem.vocab_size, seed);
  scramble(model.params(), seed + 100);
  const auto errors = relative_errors(model, problem.stream);
  CHECK(errors.size() == model.params().tensors().size());
  for (const auto& [name, err] : errors) {
    CAPTURE(name);
    CHECK(err <= 1e-4);
  }
}

}  // namespace

TEST_CASE("analytic gradients match central differences with the rp projector") { run(RefEmbedding::rp, 1); }

TEST_CASE("analytic gradients match central differences with a learned position table") {
  run(RefEmbedding::learned, 2);
}

TEST_CASE("analytic gradients match central differences with sin-cos reference codes") {
  run(RefEmbedding::sincos, 3);
}

TEST_CASE("gradients accumulate across calls") {
  const TinyProblem problem;
  const Model model(tiny_config(RefEmbedding::rp), problem.vocab_size, 4);
  Params once = Params::zeros(model.config(), model.vocab_size());
  Params twice = Params::zeros(model.config(), model.vocab_size());
  model.loss_and_grad(problem.stream, once);
  model.loss_and_grad(problem.stream, twice);
  model.loss_and_grad(problem.stream, twice);
  auto a = once.tensors();
  auto b = twice.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((2.0 * a[k].flat() - b[k].flat()).cwiseAbs().maxCoeff() <= 1e-12);
}
