use super::check_points;
use crate::{dot, Embedding, Error, Result};

/// Square non-negative matrix stored as sparse columns (row-sorted), each
/// column summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl StochasticMatrix {
    pub(crate) fn from_columns(cols: Vec<Vec<(usize, f64)>>) -> Self {
        let mut m = Self {
            n: cols.len(),
            cols,
        };
        m.normalize();
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cols[col]
            .binary_search_by_key(&row, |&(r, _)| r)
            .map_or(0.0, |p| self.cols[col][p].1)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                d[i][j] = v;
            }
        }
        d
    }

    pub(crate) fn normalize(&mut self) {
        for col in &mut self.cols {
            let s: f64 = col.iter().map(|&(_, v)| v).sum();
            if s > 0.0 {
                for e in col.iter_mut() {
                    e.1 /= s;
                }
            }
        }
    }

    /// `self · other`.
    pub(crate) fn multiply(&self, other: &StochasticMatrix) -> StochasticMatrix {
        let mut acc = vec![0.0f64; self.n];
        let mut touched: Vec<usize> = Vec::new();
        let cols = other
            .cols
            .iter()
            .map(|bcol| {
                for &(k, bv) in bcol {
                    for &(i, av) in &self.cols[k] {
                        if acc[i] == 0.0 {
                            touched.push(i);
                        }
                        acc[i] += av * bv;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let col: Vec<(usize, f64)> = touched
                    .iter()
                    .map(|&i| (i, std::mem::take(&mut acc[i])))
                    .filter(|&(_, v)| v > 0.0)
                    .collect();
                touched.clear();
                col
            })
            .collect();
        StochasticMatrix { n: self.n, cols }
    }

    /// Raises entries to `power` and renormalizes columns.
    pub(crate) fn inflate(&mut self, power: f64) {
        for col in &mut self.cols {
            for e in col.iter_mut() {
                e.1 = e.1.powf(power);
            }
        }
        self.normalize();
    }

    /// Drops entries below `eps` (never a column's largest) and renormalizes.
    pub(crate) fn prune(&mut self, eps: f64) {
        for col in &mut self.cols {
            let max = col.iter().map(|&(_, v)| v).fold(0.0, f64::max);
            col.retain(|&(_, v)| v >= eps || v == max);
        }
        self.normalize();
    }

    pub(crate) fn frobenius_distance(&self, other: &StochasticMatrix) -> f64 {
        let mut total = 0.0;
        for (a, b) in self.cols.iter().zip(&other.cols) {
            let (mut i, mut j) = (0, 0);
            loop {
                let d = match (a.get(i), b.get(j)) {
                    (Some(&(ra, va)), Some(&(rb, vb))) => {
                        if ra == rb {
                            i += 1;
                            j += 1;
                            va - vb
                        } else if ra < rb {
                            i += 1;
                            va
                        } else {
                            j += 1;
                            vb
                        }
                    }
                    (Some(&(_, va)), None) => {
                        i += 1;
                        va
                    }
                    (None, Some(&(_, vb))) => {
                        j += 1;
                        vb
                    }
                    (None, None) => break,
                };
                total += d * d;
            }
        }
        total.sqrt()
    }
}

/// Mutual-kNN cosine graph, column-normalized.
///
/// A node's neighbors are every other node whose similarity reaches its
/// `knn`-th largest similarity (ties are all included). Edges keep only mutual
/// neighbors, weighted by cosine similarity clipped at zero. Each node gets a
/// self-loop equal to its largest incident weight, or 1 when it has none.
pub fn build_knn_graph(points: &[Embedding], knn: usize) -> Result<StochasticMatrix> {
    check_points(points)?;
    if knn == 0 {
        return Err(Error::InvalidConfig("knn must be at least 1".into()));
    }
    let n = points.len();
    let unit: Vec<Embedding> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let norm = dot(p, p).sqrt();
            if norm == 0.0 {
                Err(Error::ZeroVector(i))
            } else {
                Ok(p.iter().map(|v| v / norm).collect())
            }
        })
        .collect::<Result<_>>()?;

    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut sims = vec![0.0f64; n];
    let mut scratch = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            sims[j] = if i == j {
                f64::NEG_INFINITY
            } else {
                dot(&unit[i], &unit[j])
            };
        }
        if n - 1 <= knn {
            neighbors.push((0..n).filter(|&j| j != i).collect());
            continue;
        }
        scratch.clear();
        scratch.extend(sims.iter().copied());
        let (_, threshold, _) = scratch.select_nth_unstable_by(knn - 1, |a, b| b.total_cmp(a));
        let threshold = *threshold;
        neighbors.push((0..n).filter(|&j| j != i && sims[j] >= threshold).collect());
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        let mut self_weight = 0.0f64;
        for &i in &neighbors[j] {
            if neighbors[i].binary_search(&j).is_ok() {
                let w = dot(&unit[i], &unit[j]).max(0.0);
                if w > 0.0 {
                    cols[j].push((i, w));
                    self_weight = self_weight.max(w);
                }
            }
        }
        cols[j].push((j, if self_weight > 0.0 { self_weight } else { 1.0 }));
        cols[j].sort_unstable_by_key(|&(r, _)| r);
    }
    Ok(StochasticMatrix::from_columns(cols))
}
