#include "krein/ode.hpp"

namespace krein {

namespace {

void validate(const IvpProblem& p) {
  if (!p.rhs) fail(ErrorKind::InvalidParameter, "IVP without right-hand side");
  if (!std::isfinite(p.a) || !std::isfinite(p.b) || p.a == p.b)
    fail(ErrorKind::InvalidParameter, "IVP span must be finite with a != b");
  if (!(p.rel_tol > 0) || !(p.abs_tol > 0))
    fail(ErrorKind::InvalidParameter, "IVP tolerances must be strictly positive");
  if (p.initial_state.empty()) fail(ErrorKind::InvalidParameter, "empty initial state");
}

auto erased_rhs(const IvpProblem& p) {
  return [&p](double t, const std::vector<cplx>& y, std::vector<cplx>& dy) {
    dy = p.rhs(t, y);
    if (dy.size() != y.size()) fail(ErrorKind::InvalidParameter, "rhs changed the state dimension");
  };
}

}  // namespace

IvpSolution integrate_ivp(const IvpProblem& problem) {
  validate(problem);
  IvpSolution out;
  out.state = integrate<std::vector<cplx>>(erased_rhs(problem), problem.a, problem.b,
                                           problem.initial_state,
                                           OdeOptions{problem.rel_tol, problem.abs_tol}, &out.stats);
  return out;
}

std::vector<std::vector<cplx>> integrate_ivp_sampled(const IvpProblem& problem,
                                                     const std::vector<double>& grid) {
  validate(problem);
  std::vector<std::vector<cplx>> out;
  out.reserve(grid.size());
  DormandPrince<std::vector<cplx>, decltype(erased_rhs(problem))> stepper(
      erased_rhs(problem), problem.a, problem.initial_state, OdeOptions{problem.rel_tol, problem.abs_tol});
  for (double t : grid) {
    stepper.advance_to(t);
    out.push_back(stepper.state());
  }
  return out;
}

}  // namespace krein
