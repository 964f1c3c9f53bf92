use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};

/// Connected components of the proximity graph `|x_i - x_j| < d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clusters {
    pub count: usize,
    /// Component id per particle; ids are numbered in order of each
    /// component's smallest member.
    pub labels: Vec<usize>,
}

impl Clusters {
    /// Component sizes indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    pub fn singletons(&self) -> usize {
        self.sizes().iter().filter(|&&s| s == 1).count()
    }
}

pub fn cluster_count(positions: &[f64], dim: usize, radius_d: f64) -> Result<Clusters> {
    if !(radius_d > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "radius must be positive, got {radius_d}"
        )));
    }
    if dim == 0 || positions.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: positions.len(),
        });
    }
    let n = positions.len() / dim;
    let d2 = radius_d * radius_d;
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r2: f64 = (0..dim)
                .map(|k| (positions[i * dim + k] - positions[j * dim + k]).powi(2))
                .sum();
            if r2 < d2 {
                uf.union(i, j);
            }
        }
    }
    let mut root_label = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut count = 0;
    for (i, label) in labels.iter_mut().enumerate() {
        let r = uf.find_mut(i);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        *label = root_label[r];
    }
    Ok(Clusters { count, labels })
}

/// Labels of clusters with at least two members, largest first (ties by label).
pub fn major_clusters(c: &Clusters) -> Vec<usize> {
    let sizes = c.sizes();
    let mut major: Vec<usize> = (0..c.count).filter(|&l| sizes[l] >= 2).collect();
    major.sort_by_key(|&l| (std::cmp::Reverse(sizes[l]), l));
    major
}
