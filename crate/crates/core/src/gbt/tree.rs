use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{leaf_weight, split_gain, BoosterParams};
use crate::seed::rng_indexed;
use crate::sparse::SparseMatrix;

/// A regression tree over the margin. Absent entries follow `default_left`;
/// present values below `threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        default_left: bool,
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn predict_row(&self, x: &SparseMatrix, r: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let go_left = match x.get(r, *feature) {
                        Some(v) => v < *threshold,
                        None => *default_left,
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Calls `f` with the realized gain of every split node.
    pub fn visit_splits(&self, f: &mut impl FnMut(f64)) {
        if let TreeNode::Split { gain, left, right, .. } = self {
            f(*gain);
            left.visit_splits(f);
            right.visit_splits(f);
        }
    }
}

/// Column-major copy of the training matrix with each column sorted by value.
pub(super) struct ColumnIndex {
    cols: Vec<Vec<(u32, f64)>>,
}

impl ColumnIndex {
    pub(super) fn new(x: &SparseMatrix) -> Self {
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); x.cols()];
        for r in 0..x.rows() {
            for (j, v) in x.row_entries(r) {
                cols[j].push((r as u32, v));
            }
        }
        for c in &mut cols {
            c.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }
        ColumnIndex { cols }
    }
}

#[derive(Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
    n: usize,
}

impl Stats {
    fn add(&mut self, g: f64, h: f64) {
        self.g += g;
        self.h += h;
        self.n += 1;
    }

    fn plus(self, o: Stats) -> Stats {
        Stats {
            g: self.g + o.g,
            h: self.h + o.h,
            n: self.n + o.n,
        }
    }

    fn minus(self, o: Stats) -> Stats {
        Stats {
            g: self.g - o.g,
            h: self.h - o.h,
            n: self.n - o.n,
        }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    default_left: bool,
}

enum Built {
    Leaf(f64),
    Split {
        cand: Candidate,
        left: usize,
        right: usize,
    },
}

struct Node {
    total: Stats,
    built: Option<Built>,
}

/// Per-node scratch used while scanning one feature column.
#[derive(Clone, Copy, Default)]
struct Scan {
    present: Stats,
    running: Stats,
    last: f64,
}

const NO_NODE: u32 = u32::MAX;

/// Grows tree number `tree_index` level by level.
pub(super) fn grow(
    x: &SparseMatrix,
    columns: &ColumnIndex,
    grad: &[f64],
    hess: &[f64],
    params: &BoosterParams,
    tree_index: u64,
) -> TreeNode {
    let n = x.rows();
    let mut rng = rng_indexed(params.seed, "gbt/tree", tree_index);

    let mut node_of = vec![NO_NODE; n];
    let n_rows = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    if n_rows == n {
        node_of.iter_mut().for_each(|v| *v = 0);
    } else {
        for r in sample(&mut rng, n, n_rows) {
            node_of[r] = 0;
        }
    }
    let n_feat = x.cols();
    let mut features: Vec<usize> = if n_feat == 0 {
        Vec::new()
    } else {
        let k = ((params.colsample_bytree * n_feat as f64).round() as usize).clamp(1, n_feat);
        if k == n_feat {
            (0..n_feat).collect()
        } else {
            sample(&mut rng, n_feat, k).into_vec()
        }
    };
    features.sort_unstable();

    let mut root = Stats::default();
    for r in 0..n {
        if node_of[r] == 0 {
            root.add(grad[r], hess[r]);
        }
    }
    let mut nodes = vec![Node {
        total: root,
        built: None,
    }];
    let mut active: Vec<usize> = vec![0];
    let lambda = params.lambda;

    for _depth in 0..params.max_depth {
        if active.is_empty() {
            break;
        }
        // slot of each node in `active`, or NO_NODE
        let mut slot = vec![NO_NODE; nodes.len()];
        for (s, &id) in active.iter().enumerate() {
            slot[id] = s as u32;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; active.len()];
        let mut scan = vec![Scan::default(); active.len()];
        let mut touched: Vec<usize> = Vec::new();

        for &j in &features {
            let col = &columns.cols[j];
            touched.clear();
            for &(r, _) in col {
                let id = node_of[r as usize];
                if id == NO_NODE || slot[id as usize] == NO_NODE {
                    continue;
                }
                let s = slot[id as usize] as usize;
                if scan[s].present.n == 0 {
                    touched.push(s);
                }
                scan[s].present.add(grad[r as usize], hess[r as usize]);
            }
            if touched.is_empty() {
                continue;
            }
            for &(r, v) in col {
                let id = node_of[r as usize];
                if id == NO_NODE || slot[id as usize] == NO_NODE {
                    continue;
                }
                let s = slot[id as usize] as usize;
                let total = nodes[active[s]].total;
                let st = &mut scan[s];
                let missing = total.minus(st.present);
                if st.running.n == 0 {
                    // present values all go right, missing left
                    if missing.n > 0 {
                        let left = missing;
                        let right = st.present;
                        consider(&mut best[s], left, right, params, j, v, true, lambda);
                    }
                } else if v > st.last {
                    let pl = st.running;
                    let pr = st.present.minus(pl);
                    consider(&mut best[s], pl, pr.plus(missing), params, j, v, false, lambda);
                    if missing.n > 0 {
                        consider(&mut best[s], pl.plus(missing), pr, params, j, v, true, lambda);
                    }
                }
                let st = &mut scan[s];
                st.running.add(grad[r as usize], hess[r as usize]);
                st.last = v;
            }
            for &s in &touched {
                scan[s] = Scan::default();
            }
        }

        let mut next = Vec::new();
        for (s, &id) in active.iter().enumerate() {
            match best[s] {
                Some(cand) => {
                    let left = nodes.len();
                    let right = left + 1;
                    for _ in 0..2 {
                        nodes.push(Node {
                            total: Stats::default(),
                            built: None,
                        });
                    }
                    nodes[id].built = Some(Built::Split { cand, left, right });
                    next.push(left);
                    next.push(right);
                }
                None => {
                    let t = nodes[id].total;
                    nodes[id].built = Some(Built::Leaf(leaf_weight(t.g, t.h, lambda)));
                }
            }
        }
        for r in 0..n {
            let id = node_of[r];
            if id == NO_NODE {
                continue;
            }
            if let Some(Built::Split { cand, left, right }) = &nodes[id as usize].built {
                let go_left = match x.get(r, cand.feature) {
                    Some(v) => v < cand.threshold,
                    None => cand.default_left,
                };
                let child = if go_left { *left } else { *right };
                node_of[r] = child as u32;
                nodes[child].total.add(grad[r], hess[r]);
            }
        }
        active = next;
    }
    for id in active {
        let t = nodes[id].total;
        nodes[id].built = Some(Built::Leaf(leaf_weight(t.g, t.h, lambda)));
    }
    assemble(&nodes, 0)
}

#[allow(clippy::too_many_arguments)]
fn consider(
    best: &mut Option<Candidate>,
    left: Stats,
    right: Stats,
    params: &BoosterParams,
    feature: usize,
    threshold: f64,
    default_left: bool,
    lambda: f64,
) {
    if left.n == 0 || right.n == 0 {
        return;
    }
    if left.h < params.min_child_weight || right.h < params.min_child_weight {
        return;
    }
    let gain = split_gain(left.g, left.h, right.g, right.h, lambda, params.gamma);
    if gain <= 0.0 {
        return;
    }
    if best.map_or(true, |b| gain > b.gain) {
        *best = Some(Candidate {
            gain,
            feature,
            threshold,
            default_left,
        });
    }
}

fn assemble(nodes: &[Node], id: usize) -> TreeNode {
    match nodes[id].built.as_ref().expect("every node is finalized") {
        Built::Leaf(w) => TreeNode::Leaf { weight: *w },
        Built::Split { cand, left, right } => TreeNode::Split {
            feature: cand.feature,
            threshold: cand.threshold,
            default_left: cand.default_left,
            gain: cand.gain,
            left: Box::new(assemble(nodes, *left)),
            right: Box::new(assemble(nodes, *right)),
        },
    }
}
