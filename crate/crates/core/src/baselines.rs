//! Classical comparison regressors: k-nearest neighbours, a CART regression
//! tree and ordinary least squares.
//!
//! All three take scaled feature rows and raw targets, and predict in the
//! target's own units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_training(features: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if features.is_empty() {
        return Err(Error::EmptyData);
    }
    if features.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} targets",
            features.len(),
            targets.len()
        )));
    }
    let width = features[0].len();
    if features.iter().any(|r| r.len() != width) {
        return Err(Error::invalid("ragged feature rows"));
    }
    Ok(width)
}

fn check_query(width: usize, x: &[f64]) -> Result<()> {
    if x.len() != width {
        return Err(Error::invalid(format!(
            "expected {width} features, got {}",
            x.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnnModel {
    k: usize,
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl KnnModel {
    pub fn fit(features: &[Vec<f64>], targets: &[f64], k: usize) -> Result<Self> {
        check_training(features, targets)?;
        if k == 0 || k > features.len() {
            return Err(Error::invalid(format!(
                "k must be in 1..={}, got {k}",
                features.len()
            )));
        }
        Ok(KnnModel {
            k,
            features: features.to_vec(),
            targets: targets.to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Mean target of the `k` nearest rows by Euclidean distance. Equal
    /// distances go to the lower training index.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_query(self.features[0].len(), x)?;
        let mut dist: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d2: f64 = row.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
                (d2, i)
            })
            .collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_key);
            dist.truncate(self.k);
        }
        // Sum in index order so the result does not depend on selection order.
        dist.sort_unstable_by_key(|d| d.1);
        let total: f64 = dist.iter().map(|&(_, i)| self.targets[i]).sum();
        Ok(total / self.k as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CartNode {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Regression tree grown by greedy variance reduction. Nodes live in an
/// arena; index 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct CartModel {
    nodes: Vec<CartNode>,
    width: usize,
}

/// Relative SSE margin under which two candidate splits count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// `(feature, threshold)` minimizing the summed child SSE; ties keep the
/// lowest feature, then the lowest threshold.
fn best_split(
    features: &[Vec<f64>],
    targets: &[f64],
    samples: &[usize],
    width: usize,
) -> Option<(usize, f64)> {
    let n = samples.len();
    // Center targets on the node mean to keep the prefix sums well scaled.
    let mean = samples.iter().map(|&i| targets[i]).sum::<f64>() / n as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    let mut order = samples.to_vec();
    for f in 0..width {
        order.sort_by(|&a, &b| features[a][f].total_cmp(&features[b][f]).then(a.cmp(&b)));
        let total: f64 = order.iter().map(|&i| targets[i] - mean).sum();
        let total_sq: f64 = order.iter().map(|&i| (targets[i] - mean).powi(2)).sum();
        // SSEs within this margin are ties and keep the earlier candidate.
        let tie = TIE_TOLERANCE * total_sq;
        let (mut sum_l, mut sq_l) = (0.0, 0.0);
        for pos in 1..n {
            let y = targets[order[pos - 1]] - mean;
            sum_l += y;
            sq_l += y * y;
            let lo = features[order[pos - 1]][f];
            let hi = features[order[pos]][f];
            if !(hi > lo) {
                continue;
            }
            let (nl, nr) = (pos as f64, (n - pos) as f64);
            let sum_r = total - sum_l;
            let sq_r = total_sq - sq_l;
            let sse = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr);
            let mut threshold = 0.5 * (lo + hi);
            if threshold >= hi {
                threshold = lo;
            }
            if best.is_none_or(|(_, _, b)| sse < b - tie) {
                best = Some((f, threshold, sse));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}

impl CartModel {
    pub fn fit(features: &[Vec<f64>], targets: &[f64], params: CartParams) -> Result<Self> {
        let width = check_training(features, targets)?;
        let mut model = CartModel {
            nodes: Vec::new(),
            width,
        };
        let all: Vec<usize> = (0..features.len()).collect();
        model.grow(features, targets, all, 0, &params)?;
        Ok(model)
    }

    fn grow(
        &mut self,
        features: &[Vec<f64>],
        targets: &[f64],
        samples: Vec<usize>,
        depth: usize,
        params: &CartParams,
    ) -> Result<usize> {
        if samples.is_empty() {
            return Err(Error::State("empty tree node".into()));
        }
        let id = self.nodes.len();
        let n = samples.len();
        let mean = samples.iter().map(|&i| targets[i]).sum::<f64>() / n as f64;
        self.nodes.push(CartNode::Leaf {
            value: mean,
            n_samples: n,
        });

        let first = targets[samples[0]];
        let pure = samples.iter().all(|&i| targets[i] == first);
        let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || n < params.min_samples_split.max(2) {
            return Ok(id);
        }
        let Some((feature, threshold)) = best_split(features, targets, &samples, self.width) else {
            return Ok(id);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| features[i][feature] <= threshold);
        let left = self.grow(features, targets, left, depth + 1, params)?;
        let right = self.grow(features, targets, right, depth + 1, params)?;
        self.nodes[id] = CartNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        Ok(id)
    }

    pub fn nodes(&self) -> &[CartNode] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, CartNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[CartNode], id: usize) -> usize {
            match nodes[id] {
                CartNode::Leaf { .. } => 0,
                CartNode::Split { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_query(self.width, x)?;
        let mut id = 0;
        loop {
            match self.nodes[id] {
                CartNode::Leaf { value, .. } => return Ok(value),
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OlsModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl OlsModel {
    /// Least squares with intercept via Householder QR. Columns are named
    /// `x0, x1, ...` in errors.
    pub fn fit(features: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        let width = features.first().map_or(0, Vec::len);
        let names: Vec<String> = (0..width).map(|j| format!("x{j}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::fit_named(features, targets, &names)
    }

    pub fn fit_named(features: &[Vec<f64>], targets: &[f64], names: &[&str]) -> Result<Self> {
        let width = check_training(features, targets)?;
        if names.len() != width {
            return Err(Error::invalid("one column name per feature required"));
        }
        let n = features.len();
        let p = width + 1;
        if n < p {
            return Err(Error::invalid(format!(
                "need more rows ({n}) than coefficients ({p})"
            )));
        }
        // Column-major design matrix with a leading ones column.
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(p);
        a.push(vec![1.0; n]);
        for j in 0..width {
            a.push(features.iter().map(|r| r[j]).collect());
        }
        let mut b = targets.to_vec();
        let column_name = |j: usize| {
            if j == 0 {
                "intercept".to_string()
            } else {
                names[j - 1].to_string()
            }
        };

        for k in 0..p {
            let original: f64 = a[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            let norm: f64 = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if original == 0.0 || norm <= 1e-10 * original {
                return Err(Error::SingularMatrix(column_name(k)));
            }
            let alpha = if a[k][k] > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = a[k][k..].to_vec();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            for col in a.iter_mut().skip(k) {
                let proj = 2.0 * v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum::<f64>() / vnorm2;
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= proj * vi;
                }
            }
            let proj = 2.0 * v.iter().zip(&b[k..]).map(|(x, y)| x * y).sum::<f64>() / vnorm2;
            for (c, vi) in b[k..].iter_mut().zip(&v) {
                *c -= proj * vi;
            }
        }

        // Back substitution on the upper-triangular R.
        let mut beta = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = b[i];
            for j in i + 1..p {
                s -= a[j][i] * beta[j];
            }
            beta[i] = s / a[i][i];
        }
        Ok(OlsModel {
            intercept: beta[0],
            coefficients: beta[1..].to_vec(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_query(self.coefficients.len(), x)?;
        Ok(self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>())
    }
}
