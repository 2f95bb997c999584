#pragma once

// Fixed inputs shared by the golden tests and the acceptance runner.

#include <random>
#include <string>
#include <vector>

#include "culture/annotate.hpp"
#include "culture/evallab.hpp"
#include "culture/synth.hpp"

namespace fixture {

// Fixed fixture: 12 reviews, gold and two methods over all tasks, one method
// without dominant predictions.
struct ReportFixture {
  culture::evallab::Gold gold, training;
  std::vector<culture::evallab::PredictionSet> sets;
  ReportFixture() {
    std::mt19937_64 rng(11);
    culture::evallab::PredictionSet a{"Dictionary method + word count", {}}, b{"TF-IDF + logistic reg.", {}};
    for (int i = 0; i < 12; ++i) {
      std::string id = "r" + std::to_string(100 + i);
      for (culture::Task t : culture::kTasks) {
        auto dom = culture::label_domain(t);
        culture::Label g = dom[rng() % dom.size()];
        gold[t][id] = g;
        training[t]["t" + std::to_string(i)] = dom[(i * 7 + static_cast<int>(t)) % dom.size()];
        a.add(t, id, rng() % 3 == 0 ? dom[rng() % dom.size()] : g);
        if (t != culture::Task::dominant) b.add(t, id, rng() % 2 == 0 ? dom[rng() % dom.size()] : g);
      }
    }
    sets = {a, b};
  }
};

inline culture::evallab::EvalReport golden_report() {
  ReportFixture f;
  culture::evallab::Baselines base;
  base.training = f.training;
  return culture::evallab::build_report(f.sets, f.gold, base);
}

inline std::string golden_agreement() {
  culture::synth::Options o;
  o.n = 60;
  o.seed = 7;
  o.annotations = true;
  auto res = culture::synth::synthesize(o);
  return culture::annotate::render(culture::annotate::agreement_table(culture::annotate::aggregate(res.records, 7)));
}

}  // namespace fixture
