//! Maximum clique by branch and bound with a greedy colouring bound.

use fixedbitset::FixedBitSet;

pub(crate) struct CliqueSearch {
    pub best: Vec<usize>,
    pub complete: bool,
    /// Colour count of the whole graph, an upper bound on the clique number.
    pub colour_bound: usize,
}

struct State<'a> {
    adj: &'a [FixedBitSet],
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

fn colour_sort(adj: &[FixedBitSet], p: &FixedBitSet) -> (Vec<usize>, Vec<usize>) {
    let mut uncoloured = p.clone();
    let mut order = Vec::new();
    let mut colours = Vec::new();
    let mut colour = 0;
    while uncoloured.count_ones(..) > 0 {
        colour += 1;
        let mut q = uncoloured.clone();
        while let Some(v) = q.ones().next() {
            uncoloured.remove(v);
            q.remove(v);
            q.difference_with(&adj[v]);
            order.push(v);
            colours.push(colour);
        }
    }
    (order, colours)
}

pub(crate) fn max_clique(adj: &[FixedBitSet], initial: Vec<usize>, budget: u64) -> CliqueSearch {
    let n = adj.len();
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    let colour_bound = colour_sort(adj, &all).1.last().copied().unwrap_or(0);
    let mut st = State { adj, best: initial, nodes: 0, budget, aborted: false };
    let mut r = Vec::new();
    if n > 0 {
        expand(&mut st, &mut r, all);
    }
    CliqueSearch { best: st.best, complete: !st.aborted, colour_bound }
}

fn expand(st: &mut State, r: &mut Vec<usize>, mut p: FixedBitSet) {
    st.nodes += 1;
    if st.nodes > st.budget {
        st.aborted = true;
        return;
    }
    let (order, colours) = colour_sort(st.adj, &p);
    for idx in (0..order.len()).rev() {
        if r.len() + colours[idx] <= st.best.len() {
            return;
        }
        let v = order[idx];
        r.push(v);
        let mut np = p.clone();
        np.intersect_with(&st.adj[v]);
        if np.count_ones(..) == 0 {
            if r.len() > st.best.len() {
                st.best = r.clone();
            }
        } else {
            expand(st, r, np);
        }
        r.pop();
        p.remove(v);
        if st.aborted {
            return;
        }
    }
}
