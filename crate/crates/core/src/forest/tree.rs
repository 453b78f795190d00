//! Single CART tree grown on integer sample weights.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: u16,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index into the class list of the leaf reached by `row`.
    pub fn leaf_class(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class as usize,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature as usize] <= threshold {
                        left
                    } else {
                        right
                    } as usize;
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Training data shared by every tree of a forest: dense per-column ranks
/// (column-major) and the sorted distinct values each rank refers to.
pub(crate) struct RankedData {
    pub n_rows: usize,
    pub n_cols: usize,
    pub ranks: Vec<u32>,
    pub levels: Vec<Vec<f64>>,
    pub classes: Vec<u16>,
    pub n_classes: usize,
}

impl RankedData {
    pub fn new(x: &[f64], n_cols: usize, classes: Vec<u16>, n_classes: usize) -> Self {
        let n_rows = classes.len();
        let mut ranks = vec![0u32; n_rows * n_cols];
        let mut levels = Vec::with_capacity(n_cols);
        let mut order: Vec<usize> = (0..n_rows).collect();
        for j in 0..n_cols {
            let col = |i: usize| x[i * n_cols + j];
            order.sort_unstable_by(|&a, &b| col(a).total_cmp(&col(b)));
            let mut uniq: Vec<f64> = Vec::new();
            for &i in &order {
                let v = col(i);
                if uniq.last() != Some(&v) {
                    uniq.push(v);
                }
                ranks[j * n_rows + i] = (uniq.len() - 1) as u32;
            }
            levels.push(uniq);
        }
        Self {
            n_rows,
            n_cols,
            ranks,
            levels,
            classes,
            n_classes,
        }
    }

    fn rank(&self, feature: usize, row: u32) -> u32 {
        self.ranks[feature * self.n_rows + row as usize]
    }

    /// Midpoint between two consecutive levels, kept strictly below the upper one.
    fn threshold(&self, feature: usize, rank: u32) -> f64 {
        let lo = self.levels[feature][rank as usize];
        let hi = self.levels[feature][rank as usize + 1];
        let mid = lo + (hi - lo) / 2.0;
        if mid >= hi || !mid.is_finite() {
            lo
        } else {
            mid
        }
    }
}

pub(crate) struct GrowParams {
    pub max_features: usize,
    pub min_samples_split: usize,
}

struct Pending {
    node: usize,
    start: usize,
    end: usize,
}

struct BestSplit {
    score: f64,
    feature: usize,
    rank: u32,
}

const RADIX_MIN: usize = 256;

/// Stable LSD radix sort on the rank held in the upper 32 bits. Only the
/// rank order matters to the split scan, so equal ranks may stay in any
/// consistent order.
fn radix_sort_by_rank(keys: &mut Vec<u64>, scratch: &mut Vec<u64>, max_rank: u32) {
    let mut shift = 32;
    while shift < 64 && (max_rank as u64) >> (shift - 32) > 0 {
        let mut counts = [0usize; 257];
        for &k in keys.iter() {
            counts[((k >> shift) & 0xFF) as usize + 1] += 1;
        }
        for b in 1..257 {
            counts[b] += counts[b - 1];
        }
        scratch.clear();
        scratch.resize(keys.len(), 0);
        for &k in keys.iter() {
            let b = ((k >> shift) & 0xFF) as usize;
            scratch[counts[b]] = k;
            counts[b] += 1;
        }
        std::mem::swap(keys, scratch);
        shift += 8;
    }
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| c * c).sum::<f64>() / (total * total)
}

/// Grow one tree. `weights[i]` is the multiplicity of training row `i`;
/// rows with zero weight are ignored. Returns the tree and its raw,
/// unnormalized impurity decrease per feature.
pub(crate) fn grow<R: Rng>(
    data: &RankedData,
    weights: &[u32],
    params: &GrowParams,
    rng: &mut R,
) -> (Tree, Vec<f64>) {
    let k = data.n_classes;
    let mut samples: Vec<u32> = (0..data.n_rows as u32)
        .filter(|&i| weights[i as usize] > 0)
        .collect();
    let mut nodes = vec![Node::Leaf { class: 0 }];
    let mut importance = vec![0.0; data.n_cols];
    let mut features: Vec<usize> = (0..data.n_cols).collect();
    let mut keys: Vec<u64> = Vec::with_capacity(samples.len());
    let mut scratch: Vec<u64> = Vec::with_capacity(samples.len());
    let mut counts = vec![0.0; k];
    let mut left = vec![0.0; k];
    let mut stack = vec![Pending {
        node: 0,
        start: 0,
        end: samples.len(),
    }];

    while let Some(Pending { node, start, end }) = stack.pop() {
        let members = &samples[start..end];
        counts.iter_mut().for_each(|c| *c = 0.0);
        for &s in members {
            counts[data.classes[s as usize] as usize] += weights[s as usize] as f64;
        }
        let total: f64 = counts.iter().sum();
        let majority = counts
            .iter()
            .enumerate()
            .fold(0, |best, (c, &v)| if v > counts[best] { c } else { best });
        nodes[node] = Node::Leaf {
            class: majority as u16,
        };
        let pure = counts[majority] == total;
        if pure || members.len() < params.min_samples_split {
            continue;
        }

        let total_sq: f64 = counts.iter().map(|c| c * c).sum();
        let mut best: Option<BestSplit> = None;
        let mut informative = 0;
        let mut drawn = 0;
        while informative < params.max_features && drawn < features.len() {
            let pick = rng.random_range(drawn..features.len());
            features.swap(drawn, pick);
            let f = features[drawn];
            drawn += 1;

            let (mut lo, mut hi) = (u32::MAX, 0);
            keys.clear();
            for &s in members {
                let r = data.rank(f, s);
                lo = lo.min(r);
                hi = hi.max(r);
                keys.push(((r as u64) << 32) | s as u64);
            }
            if lo == hi {
                continue;
            }
            informative += 1;
            if keys.len() >= RADIX_MIN {
                radix_sort_by_rank(&mut keys, &mut scratch, hi);
            } else {
                keys.sort_unstable();
            }

            left.iter_mut().for_each(|c| *c = 0.0);
            let (mut w_left, mut sq_left, mut sq_right) = (0.0, 0.0, total_sq);
            for pos in 0..keys.len() - 1 {
                let s = (keys[pos] & 0xFFFF_FFFF) as usize;
                let c = data.classes[s] as usize;
                let w = weights[s] as f64;
                let l = left[c];
                let r = counts[c] - l;
                sq_left += w * (2.0 * l + w);
                sq_right -= w * (2.0 * r - w);
                left[c] = l + w;
                w_left += w;
                let rank = (keys[pos] >> 32) as u32;
                if rank == (keys[pos + 1] >> 32) as u32 {
                    continue;
                }
                let score = sq_left / w_left + sq_right / (total - w_left);
                let better = match &best {
                    None => true,
                    Some(b) => score > b.score || (score == b.score && f < b.feature),
                };
                if better {
                    best = Some(BestSplit {
                        score,
                        feature: f,
                        rank,
                    });
                }
            }
        }

        let Some(split) = best else { continue };
        let range = &mut samples[start..end];
        let mut mid = 0;
        for i in 0..range.len() {
            if data.rank(split.feature, range[i]) <= split.rank {
                range.swap(i, mid);
                mid += 1;
            }
        }

        let mut count_of = |slice: &[u32]| {
            left.iter_mut().for_each(|c| *c = 0.0);
            for &s in slice {
                left[data.classes[s as usize] as usize] += weights[s as usize] as f64;
            }
            let w: f64 = left.iter().sum();
            (w, gini(&left, w))
        };
        let (w_l, g_l) = count_of(&range[..mid]);
        let (w_r, g_r) = count_of(&range[mid..]);
        let decrease = total * gini(&counts, total) - w_l * g_l - w_r * g_r;
        importance[split.feature] += decrease.max(0.0);

        let l = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        nodes.push(Node::Leaf { class: 0 });
        nodes[node] = Node::Split {
            feature: split.feature as u32,
            threshold: data.threshold(split.feature, split.rank),
            left: l as u32,
            right: l as u32 + 1,
        };
        stack.push(Pending {
            node: l + 1,
            start: start + mid,
            end,
        });
        stack.push(Pending {
            node: l,
            start,
            end: start + mid,
        });
    }
    (Tree { nodes }, importance)
}
