#pragma once

namespace axiom::model {

// Online growing heuristic shared by all four mixtures. Each pass scores
// every item of the batch against every component (expected log-likelihood,
// no mixing term); if even the worst-explained item clears tau the batch is
// explained and growth stops, otherwise a fresh component is instantiated on
// that item, the item is hard-assigned to it, and the handle refits. Capped
// both by model capacity and by the maximum number of expansion steps.
//
// Handle requirements:
//   struct Worst { int item; double best; bool any; };
//   Worst refresh_and_worst();           // score batch, return worst-explained item
//   int components() const;
//   bool at_capacity() const;
//   void create_and_update(int item);    // new component at item, hard-assign, M-step
struct ExpansionOutcome {
    int created = 0;
    bool capped = false;
    double final_worst = 0.0;
};

template <class Handle>
ExpansionOutcome expand_batch(Handle& h, double tau, int max_steps) {
    ExpansionOutcome out;
    for (int g = 0; g < max_steps; ++g) {
        const auto w = h.refresh_and_worst();
        out.final_worst = w.best;
        if (!w.any) break;
        if (h.components() > 0 && w.best > tau) break;
        if (h.at_capacity()) {
            out.capped = true;
            break;
        }
        h.create_and_update(w.item);
        ++out.created;
    }
    return out;
}

}  // namespace axiom::model
