//! Brute-force oracles shared by the integration tests. None of these go
//! through the library's search code.

#![allow(dead_code)]

use ownbm::{Instance, Weight, WeightMode};

/// Every subset of edges (as a bitmask) whose endpoints are pairwise
/// disjoint. Only for small edge counts.
pub fn matching_masks<W: Weight>(inst: &Instance<W>) -> Vec<u32> {
    let m = inst.edges.len();
    assert!(m <= 20, "brute force over 2^{m} subsets");
    (0u32..(1 << m))
        .filter(|&mask| {
            let mut seen = vec![false; inst.n + 1];
            (0..m).filter(|k| mask >> k & 1 == 1).all(|k| {
                let e = &inst.edges[k];
                let fresh = !seen[e.origin] && !seen[e.terminal];
                seen[e.origin] = true;
                seen[e.terminal] = true;
                fresh
            })
        })
        .collect()
}

/// Objective value of the matching `mask` under the instance's own mode.
pub fn mask_value<W: Weight>(inst: &Instance<W>, mask: u32) -> W {
    let vw = |v: usize| inst.vertex_weights.as_ref().map_or(W::zero(), |ws| ws[v - 1]);
    (0..inst.edges.len())
        .filter(|k| mask >> k & 1 == 1)
        .fold(W::zero(), |acc, k| {
            let e = &inst.edges[k];
            acc + match inst.mode {
                WeightMode::Edge => e.weight.unwrap(),
                WeightMode::Vertex => vw(e.origin) + vw(e.terminal),
            }
        })
}

pub fn brute_force_opt<W: Weight>(inst: &Instance<W>) -> W {
    matching_masks(inst)
        .into_iter()
        .map(|mask| mask_value(inst, mask))
        .fold(W::zero(), |a, b| a.max_with(b))
}

/// Value of the best allocation of items to bidders, where bidder `i` values
/// a bundle at its heaviest edge `(j, i)`. Each item goes to one bidder it
/// has an edge to, or to nobody.
pub fn optimal_allocation<W: Weight>(inst: &Instance<W>) -> W {
    fn go<W: Weight>(inst: &Instance<W>, item: usize, best: &mut Vec<W>) -> W {
        if item > inst.n {
            return best.iter().fold(W::zero(), |a, &b| a + b);
        }
        let mut top = go(inst, item + 1, best);
        for e in inst.edges.iter().filter(|e| e.origin == item) {
            let i = e.terminal;
            let prev = best[i];
            best[i] = prev.max_with(e.weight.unwrap());
            top = top.max_with(go(inst, item + 1, best));
            best[i] = prev;
        }
        top
    }
    go(inst, 1, &mut vec![W::zero(); inst.n + 1])
}

/// Direct evaluation of a bidder's valuation from the edge list.
pub fn bundle_value(inst: &Instance, bidder: usize, items: &[usize]) -> f64 {
    inst.edges
        .iter()
        .filter(|e| e.terminal == bidder && items.contains(&e.origin))
        .map(|e| e.weight.unwrap())
        .fold(0.0, f64::max)
}
