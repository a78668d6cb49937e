//! Band LU factorization after a bandwidth-reducing reordering.
//!
//! Factorization is done without pivoting. The thermal operators assembled
//! by this crate have a positive-definite symmetric part, so every leading
//! principal minor is nonzero and the factorization exists.

use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering of the sparsity graph of `a`.
///
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let bfs_levels = |root: usize| -> (usize, usize) {
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut queue = VecDeque::from([root]);
        let mut last = root;
        while let Some(v) = queue.pop_front() {
            last = v;
            for &w in &adj[v] {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (level[last], last)
    };

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    while order.len() < n {
        // Pseudo-peripheral start within the next unvisited component.
        let mut root = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        let (mut depth, mut far) = bfs_levels(root);
        for _ in 0..4 {
            let (d, f) = bfs_levels(far);
            if d <= depth {
                break;
            }
            root = far;
            depth = d;
            far = f;
        }

        visited[root] = true;
        let start = order.len();
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

fn bandwidths(a: &CsrMatrix, inv: &[usize]) -> (usize, usize) {
    let (mut lower, mut upper) = (0, 0);
    for (i, j, _) in a.entries() {
        let (pi, pj) = (inv[i], inv[j]);
        if pi > pj {
            lower = lower.max(pi - pj);
        } else {
            upper = upper.max(pj - pi);
        }
    }
    (lower, upper)
}

/// LU factors of a permuted banded matrix `P A P^T = L U`.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    upper: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// Row-major band storage; entry (i, j) lives at `i * width + (j + lower - i)`.
    band: Vec<f64>,
}

impl BandedLu {
    pub fn factorize(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let identity: Vec<usize> = (0..n).collect();
        let rcm = reverse_cuthill_mckee(a);
        let mut inv_rcm = vec![0; n];
        for (new, &old) in rcm.iter().enumerate() {
            inv_rcm[old] = new;
        }
        let natural = bandwidths(a, &identity);
        let reordered = bandwidths(a, &inv_rcm);
        let (perm, inv, (lower, upper)) = if reordered.0 + reordered.1 < natural.0 + natural.1 {
            (rcm, inv_rcm, reordered)
        } else {
            (identity.clone(), identity, natural)
        };

        let width = lower + upper + 1;
        let mut band = vec![0.0; n * width];
        for (i, j, v) in a.entries() {
            let (pi, pj) = (inv[i], inv[j]);
            band[pi * width + (pj + lower - pi)] += v;
        }

        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = band[k * width + lower];
            if pivot.abs() <= 1e-14 * scale || !pivot.is_finite() {
                return Err(Error::SingularMatrix(perm[k]));
            }
            let row_end = (k + upper).min(n - 1);
            for i in k + 1..=(k + lower).min(n - 1) {
                let ik = i * width + (k + lower - i);
                if band[ik] == 0.0 {
                    continue;
                }
                let l = band[ik] / pivot;
                band[ik] = l;
                for j in k + 1..=row_end {
                    let kj = band[k * width + (j + lower - k)];
                    band[i * width + (j + lower - i)] -= l * kj;
                }
            }
        }
        Ok(Self {
            n,
            lower,
            upper,
            perm,
            band,
        })
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, lower, upper) = (self.n, self.lower, self.upper);
        let width = lower + upper + 1;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for j in i.saturating_sub(lower)..i {
                acc -= self.band[i * width + (j + lower - i)] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..=(i + upper).min(n - 1) {
                acc -= self.band[i * width + (j + lower - i)] * y[j];
            }
            y[i] = acc / self.band[i * width + lower];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
