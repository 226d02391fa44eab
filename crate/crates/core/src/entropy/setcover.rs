//! Exact unweighted set cover by depth-first branch and bound.
//!
//! Bound: a set of uncovered elements no two of which share a covering set
//! needs one distinct set each. Branching is on the uncovered element with
//! the fewest covering sets.

use fixedbitset::FixedBitSet;

pub(crate) struct SetCover {
    n: usize,
    sets: Vec<FixedBitSet>,
    ids: Vec<usize>,
    elem_sets: Vec<Vec<usize>>,
    elem_order: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Search {
    /// Best cover found, as caller-side set ids.
    pub best: Option<Vec<usize>>,
    pub root_lower: usize,
    pub complete: bool,
}

struct State {
    best_len: usize,
    best: Option<Vec<usize>>,
    nodes: u64,
    budget: u64,
    aborted: bool,
    stop_at: Option<usize>,
    stamp: Vec<u64>,
    tick: u64,
}

impl SetCover {
    /// `sets[i]` is the coverage of caller set `i`. Sets contained in another
    /// set are dropped (equal sets keep the lowest id).
    pub fn new(n: usize, sets: Vec<FixedBitSet>) -> Self {
        let counts: Vec<usize> = sets.iter().map(|s| s.count_ones(..)).collect();
        let mut order: Vec<usize> = (0..sets.len()).filter(|&i| counts[i] > 0).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let mut kept: Vec<usize> = Vec::new();
        for &i in &order {
            if !kept.iter().any(|&k| sets[i].is_subset(&sets[k])) {
                kept.push(i);
            }
        }
        kept.sort_unstable();
        let kept_sets: Vec<FixedBitSet> = kept.iter().map(|&i| sets[i].clone()).collect();
        let mut elem_sets = vec![Vec::new(); n];
        for (si, s) in kept_sets.iter().enumerate() {
            for e in s.ones() {
                elem_sets[e].push(si);
            }
        }
        let mut elem_order: Vec<usize> = (0..n).collect();
        elem_order.sort_by_key(|&e| (elem_sets[e].len(), e));
        SetCover { n, sets: kept_sets, ids: kept, elem_sets, elem_order }
    }

    pub fn coverable(&self) -> bool {
        self.elem_sets.iter().all(|s| !s.is_empty())
    }

    fn full(&self) -> FixedBitSet {
        let mut u = FixedBitSet::with_capacity(self.n);
        u.insert_range(..);
        u
    }

    /// Max-coverage greedy; ties to the lowest id.
    pub fn greedy(&self) -> Vec<usize> {
        let mut uncovered = self.full();
        let mut chosen = Vec::new();
        while uncovered.count_ones(..) > 0 {
            let mut best = (usize::MAX, 0);
            for (i, s) in self.sets.iter().enumerate() {
                let c = s.intersection_count(&uncovered);
                if c > best.1 {
                    best = (i, c);
                }
            }
            if best.0 == usize::MAX {
                break;
            }
            uncovered.difference_with(&self.sets[best.0]);
            chosen.push(self.ids[best.0]);
        }
        chosen
    }

    fn lower(&self, uncovered: &FixedBitSet, st: &mut State) -> usize {
        st.tick += 1;
        let tick = st.tick;
        let mut count = 0;
        for &e in &self.elem_order {
            if !uncovered.contains(e) {
                continue;
            }
            let ss = &self.elem_sets[e];
            if ss.iter().all(|&s| st.stamp[s] != tick) {
                count += 1;
                for &s in ss {
                    st.stamp[s] = tick;
                }
            }
        }
        count
    }

    /// Optimize (`stop_at = None`) or decide whether a cover of size at most
    /// `stop_at` exists. `incumbent` is a known cover in caller ids.
    pub fn search(&self, stop_at: Option<usize>, incumbent: Option<Vec<usize>>, budget: u64) -> Search {
        let mut st = State {
            best_len: usize::MAX,
            best: None,
            nodes: 0,
            budget,
            aborted: false,
            stop_at,
            stamp: vec![0; self.sets.len()],
            tick: 0,
        };
        if let Some(inc) = incumbent {
            st.best_len = inc.len();
            st.best = Some(inc);
        }
        let uncovered = self.full();
        let root_lower = self.lower(&uncovered, &mut st);
        if let Some(t) = stop_at {
            if st.best_len <= t {
                return Search { best: st.best, root_lower, complete: true };
            }
            st.best_len = st.best_len.min(t + 1);
        }
        if !self.coverable() {
            return Search { best: None, root_lower, complete: true };
        }
        let mut chosen = Vec::new();
        self.dfs(uncovered, &mut chosen, &mut st);
        let best = match (stop_at, &st.best) {
            (Some(t), Some(b)) if b.len() > t => None,
            _ => st.best.clone(),
        };
        Search { best, root_lower, complete: !st.aborted }
    }

    fn dfs(&self, uncovered: FixedBitSet, chosen: &mut Vec<usize>, st: &mut State) {
        st.nodes += 1;
        if st.nodes > st.budget {
            st.aborted = true;
            return;
        }
        if uncovered.count_ones(..) == 0 {
            if chosen.len() < st.best_len {
                st.best_len = chosen.len();
                st.best = Some(chosen.iter().map(|&s| self.ids[s]).collect());
            }
            return;
        }
        if chosen.len() + self.lower(&uncovered, st) >= st.best_len {
            return;
        }
        let e = uncovered
            .ones()
            .min_by_key(|&e| (self.elem_sets[e].len(), e))
            .expect("nonempty");
        let mut cands: Vec<(usize, usize)> =
            self.elem_sets[e].iter().map(|&s| (s, self.sets[s].intersection_count(&uncovered))).collect();
        cands.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (s, _) in cands {
            let mut next = uncovered.clone();
            next.difference_with(&self.sets[s]);
            chosen.push(s);
            self.dfs(next, chosen, st);
            chosen.pop();
            if st.aborted {
                return;
            }
            if let Some(t) = st.stop_at {
                if st.best_len <= t {
                    return;
                }
            }
        }
    }
}
