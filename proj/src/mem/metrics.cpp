#include "lidlab/mem/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "lidlab/core/rng.hpp"
#include "lidlab/scorenet/tape.hpp"

namespace lidlab::mem {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::a_cfg: return "a_cfg";
    case MetricKind::a_scfg: return "a_scfg";
    case MetricKind::a_flipd: return "a_flipd";
  }
  return "?";
}

namespace {

void validate(const scorenet::ScoreModel& model, const Vec& c, const MetricConfig& cfg) {
  if (model.cond_dim() == 0)
    throw std::invalid_argument("accumulate_metric: model is unconditional");
  if (c.size() != 0 && c.size() != model.cond_dim())
    throw std::invalid_argument("accumulate_metric: conditioning dimension mismatch");
  if (cfg.n_trajectories < 1 || cfg.steps < 1)
    throw std::invalid_argument("accumulate_metric: N and T must be >= 1");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
    throw std::invalid_argument("accumulate_metric: bad lambda");
}

struct StepDump {
  int traj = 0;
  int step = 0;
  double t = 0.0;
  double sig2 = 0.0;
  Vec state;              // x~ at this step
  double cfg_sq = 0.0;    // |s(c) - s(null)|^2 at the physical point
  double scfg_sq = 0.0;   // |s_cfg|^2
  double trace_cfg = 0.0; // tr d s_cfg / d x
  double psi = 0.0;
};

// DDIM trajectories in x~ coordinates under CFG; dumps carry everything the
// three metrics need at each visited step.
std::vector<StepDump> run_trajectories(const scorenet::ScoreModel& model, const Vec& c,
                                       const MetricConfig& cfg, std::uint64_t seed) {
  const auto& sched = model.schedule();
  const int d = model.ambient_dim();
  std::vector<double> grid(cfg.steps + 1);
  for (int k = 0; k <= cfg.steps; ++k)
    grid[k] = 1.0 - (1.0 - cfg.t_min) * static_cast<double>(k) / cfg.steps;

  std::vector<StepDump> dumps;
  dumps.reserve(static_cast<std::size_t>(cfg.n_trajectories) * cfg.steps);
  const Rng base(seed);
  for (int traj = 0; traj < cfg.n_trajectories; ++traj) {
    Rng rng = base.fork(static_cast<std::uint64_t>(traj));
    Vec xt = rng.gaussian_vec(d) / sched.psi(1.0);
    for (int k = 0; k < cfg.steps; ++k) {
      const double t = grid[k];
      StepDump dump;
      dump.traj = traj;
      dump.step = k;
      dump.t = t;
      dump.sig2 = sched.sigma2(t);
      dump.psi = sched.psi(t);
      dump.state = xt;

      const Vec xe = dump.psi * xt;
      const Vec s0 = model.score(xe, t, Vec());
      const Vec sc = (c.size() == 0) ? s0 : Vec(model.score(xe, t, c));
      const Vec scfg = s0 + cfg.lambda * (sc - s0);
      dump.cfg_sq = (sc - s0).squaredNorm();
      dump.scfg_sq = scfg.squaredNorm();

      // tr d s_cfg / d x at the physical point
      if (cfg.trace == scorenet::TraceMode::exact) {
        Vec e = Vec::Zero(d);
        double tr = 0.0;
        for (int i = 0; i < d; ++i) {
          e[i] = 1.0;
          const Vec j0 = model.score_dx(xe, t, Vec(), e);
          const Vec jc = (c.size() == 0) ? j0 : Vec(model.score_dx(xe, t, c, e));
          tr += (j0 + cfg.lambda * (jc - j0))[i];
          e[i] = 0.0;
        }
        dump.trace_cfg = tr;
      } else {
        Rng trng = base.fork(0x7a0000u + static_cast<std::uint64_t>(traj) * cfg.steps + k);
        double acc = 0.0;
        for (int p = 0; p < cfg.probes; ++p) {
          const Vec v = trng.rademacher_vec(d);
          const Vec j0 = model.score_dx(xe, t, Vec(), v);
          const Vec jc = (c.size() == 0) ? j0 : Vec(model.score_dx(xe, t, c, v));
          acc += v.dot(j0 + cfg.lambda * (jc - j0));
        }
        dump.trace_cfg = acc / cfg.probes;
      }
      dumps.push_back(std::move(dump));

      // Euler step of dx~/dt = -1/2 (beta/psi^2) s~ with s~ = psi s(psi x~, t)
      const double dt = grid[k] - grid[k + 1];
      xt += dt * 0.5 * (sched.beta(t) / dump.psi) * scfg;
    }
  }
  return dumps;
}

MetricReport assemble(const std::vector<StepDump>& dumps, MetricKind kind,
                      const Scheduling& sched, const MetricConfig& cfg, int d) {
  MetricReport rep;
  rep.metric = kind;
  rep.n_trajectories = cfg.n_trajectories;
  rep.steps = cfg.steps;
  rep.lambda = cfg.lambda;
  rep.scheduling = sched;
  double sum = 0.0;
  int count = 0;
  for (const auto& dump : dumps) {
    StepTerm st;
    st.traj = dump.traj;
    st.step = dump.step;
    st.t = dump.t;
    st.in_support = sched.contains(dump.t);
    switch (kind) {
      case MetricKind::a_cfg: st.term = dump.sig2 * dump.cfg_sq; break;
      case MetricKind::a_scfg: st.term = dump.sig2 * dump.scfg_sq; break;
      case MetricKind::a_flipd:
        st.term = d + dump.sig2 * (dump.scfg_sq + dump.trace_cfg);
        break;
    }
    rep.terms.push_back(st);
    rep.cfg_vector_norms.push_back(dump.psi * std::sqrt(dump.cfg_sq));
    rep.cfg_adjusted_norms.push_back(dump.psi * std::sqrt(dump.scfg_sq));
    if (st.in_support) {
      sum += st.term;
      ++count;
    }
  }
  if (count == 0)
    throw std::invalid_argument("accumulate_metric: no trajectory step inside the scheduling "
                                "support; increase steps or widen the support");
  rep.value = sum / count;
  return rep;
}

Scheduling scheduling_for(MetricKind kind, const MetricConfig& cfg) {
  return kind == MetricKind::a_flipd ? cfg.sched_flipd : cfg.sched_cfg;
}

} // namespace

MetricReport accumulate_metric(const scorenet::ScoreModel& model, const Vec& c,
                               MetricKind kind, const MetricConfig& cfg, std::uint64_t seed) {
  validate(model, c, cfg);
  const auto dumps = run_trajectories(model, c, cfg, seed);
  return assemble(dumps, kind, scheduling_for(kind, cfg), cfg, model.ambient_dim());
}

MetricBundle accumulate_all(const scorenet::ScoreModel& model, const Vec& c,
                            const MetricConfig& cfg, std::uint64_t seed,
                            std::optional<Scheduling> common_scheduling) {
  validate(model, c, cfg);
  const auto dumps = run_trajectories(model, c, cfg, seed);
  const int d = model.ambient_dim();
  MetricBundle bundle;
  const Scheduling s_cfg = common_scheduling.value_or(cfg.sched_cfg);
  const Scheduling s_flipd = common_scheduling.value_or(cfg.sched_flipd);
  bundle.a_cfg = assemble(dumps, MetricKind::a_cfg, s_cfg, cfg, d);
  bundle.a_scfg = assemble(dumps, MetricKind::a_scfg, s_cfg, cfg, d);
  bundle.a_flipd = assemble(dumps, MetricKind::a_flipd, s_flipd, cfg, d);
  double sum = 0.0;
  int count = 0;
  for (const auto& dump : dumps) {
    if (!s_flipd.contains(dump.t)) continue;
    sum += dump.sig2 * dump.trace_cfg;
    ++count;
  }
  bundle.mean_trace_term = sum / count;
  return bundle;
}

Vec metric_gradient(const scorenet::ScoreModel& model, const Vec& c, MetricKind kind,
                    const MetricConfig& cfg, std::uint64_t seed, double* value_out) {
  validate(model, c, cfg);
  if (c.size() == 0)
    throw std::invalid_argument("metric_gradient: needs an explicit conditioning vector");
  const auto dumps = run_trajectories(model, c, cfg, seed);
  const Scheduling sched = scheduling_for(kind, cfg);
  const int d = model.ambient_dim();

  scorenet::CondTape tape(model, c);
  std::optional<scorenet::CondTape::ScalId> total;
  int count = 0;
  for (const auto& dump : dumps) {
    if (!sched.contains(dump.t)) continue;
    const Vec xe = dump.psi * dump.state;
    scorenet::CondTape::ScalId term{0};
    switch (kind) {
      case MetricKind::a_cfg: {
        const auto diff = tape.sub(tape.score(xe, dump.t, true), tape.score(xe, dump.t, false));
        term = tape.affine(tape.squared_norm(diff), dump.sig2, 0.0);
        break;
      }
      case MetricKind::a_scfg: {
        const auto scfg = tape.cfg_score(xe, dump.t, cfg.lambda);
        term = tape.affine(tape.squared_norm(scfg), dump.sig2, 0.0);
        break;
      }
      case MetricKind::a_flipd: {
        const auto scfg = tape.cfg_score(xe, dump.t, cfg.lambda);
        auto acc = tape.squared_norm(scfg);
        if (cfg.trace == scorenet::TraceMode::exact) {
          Vec e = Vec::Zero(d);
          for (int i = 0; i < d; ++i) {
            e[i] = 1.0;
            acc = tape.add(acc, tape.dot(tape.cfg_score_dx(xe, dump.t, cfg.lambda, e), e));
            e[i] = 0.0;
          }
        } else {
          // same probe stream as the value path
          Rng trng = Rng(seed).fork(0x7a0000u +
                                    static_cast<std::uint64_t>(dump.traj) * cfg.steps +
                                    dump.step);
          std::optional<scorenet::CondTape::ScalId> tr;
          for (int p = 0; p < cfg.probes; ++p) {
            const Vec v = trng.rademacher_vec(d);
            const auto q = tape.dot(tape.cfg_score_dx(xe, dump.t, cfg.lambda, v), v);
            tr = tr ? tape.add(*tr, q) : q;
          }
          acc = tape.add(acc, tape.affine(*tr, 1.0 / cfg.probes, 0.0));
        }
        term = tape.affine(acc, dump.sig2, static_cast<double>(d));
        break;
      }
    }
    total = total ? tape.add(*total, term) : term;
    ++count;
  }
  if (!total)
    throw std::invalid_argument("metric_gradient: no trajectory step inside the scheduling "
                                "support");
  const auto objective = tape.affine(*total, 1.0 / count, 0.0);
  if (value_out) *value_out = tape.value(objective);
  return tape.grad(objective);
}

} // namespace lidlab::mem
