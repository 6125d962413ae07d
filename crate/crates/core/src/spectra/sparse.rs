//! Sparse symmetric matrices and a fill-reducing `LDLᵀ` factorization of the
//! shifted pencil `K − σM`, used for inertia counts and shift-invert solves.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// A symmetric sparse matrix stored as its diagonal and full off-diagonal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparse {
    pub diag: Vec<f64>,
    /// `rows[i]` lists `(j, a_ij)` for `j ≠ i`, sorted by `j`.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SymSparse {
    /// Builds from upper or lower triplets; duplicates are summed and each
    /// off-diagonal entry is mirrored.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut diag = vec![0.0; n];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            if i == j {
                diag[i] += v;
            } else {
                rows[i].push((j, v));
                rows[j].push((i, v));
            }
        }
        for r in rows.iter_mut() {
            r.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
            for &(j, v) in r.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            *r = merged;
        }
        SymSparse { diag, rows }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n() {
            let mut s = self.diag[i] * x[i];
            for &(j, v) in &self.rows[i] {
                s += v * x[j];
            }
            y[i] = s;
        }
    }

    /// Upper bound on the eigenvalues of `M⁻¹K` by Gershgorin discs.
    pub fn gershgorin_bound(&self, mass: &[f64]) -> f64 {
        (0..self.n())
            .map(|i| (self.diag[i].abs() + self.rows[i].iter().map(|e| e.1.abs()).sum::<f64>()) / mass[i])
            .fold(0.0, f64::max)
    }

    /// Number of connected components of the off-diagonal graph.
    pub fn components(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.rows[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Minimum-degree elimination order on the graph of `a`, returning the order
/// and, for every eliminated vertex, its neighbours at elimination time.
fn minimum_degree(a: &SymSparse) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = a.n();
    let mut adj: Vec<Vec<usize>> = a.rows.iter().map(|r| r.iter().map(|e| e.0).collect()).collect();
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|v| Reverse((adj[v].len(), v))).collect();
    let mut order = Vec::with_capacity(n);
    let mut patterns = Vec::with_capacity(n);
    while let Some(Reverse((deg, v))) = heap.pop() {
        if done[v] || deg != adj[v].len() {
            continue;
        }
        done[v] = true;
        let nb = std::mem::take(&mut adj[v]);
        for &u in &nb {
            let mut merged: Vec<usize> = Vec::with_capacity(adj[u].len() + nb.len());
            let (x, y) = (&adj[u], &nb);
            let (mut i, mut j) = (0, 0);
            while i < x.len() || j < y.len() {
                let next = if j >= y.len() || (i < x.len() && x[i] < y[j]) {
                    i += 1;
                    x[i - 1]
                } else if i >= x.len() || y[j] < x[i] {
                    j += 1;
                    y[j - 1]
                } else {
                    i += 1;
                    j += 1;
                    x[i - 1]
                };
                if next != u && next != v {
                    merged.push(next);
                }
            }
            adj[u] = merged;
            heap.push(Reverse((adj[u].len(), u)));
        }
        order.push(v);
        patterns.push(nb);
    }
    (order, patterns)
}

/// Symbolic structure and numeric storage of `P(K − σM)Pᵀ = LDLᵀ`.
#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// Value slots of the off-diagonal entries of `K`, aligned with `k_vals`.
    k_slots: Vec<usize>,
    k_vals: Vec<f64>,
    k_diag_new: Vec<f64>,
    m_new: Vec<f64>,
    upd_ptr: Vec<usize>,
    upd_tgt: Vec<u32>,
    /// Diagonal slots `0..n`, then strict lower entries column by column.
    vals: Vec<f64>,
    pivots_perturbed: usize,
}

impl Ldl {
    /// Analyses the sparsity of `k` (the pattern of `M` is diagonal).
    pub fn new(k: &SymSparse, mass: &[f64]) -> Self {
        let n = k.n();
        let (order, patterns) = minimum_degree(k);
        let mut iperm = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            iperm[old] = new;
        }
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::new();
        for (new, pat) in patterns.iter().enumerate() {
            let mut rows: Vec<usize> = pat.iter().map(|&o| iperm[o]).collect();
            rows.sort_unstable();
            debug_assert!(rows.iter().all(|&r| r > new));
            row_idx.extend_from_slice(&rows);
            col_ptr[new + 1] = row_idx.len();
        }
        let slot = |col: usize, row: usize| -> usize {
            let s = &row_idx[col_ptr[col]..col_ptr[col + 1]];
            col_ptr[col] + s.binary_search(&row).expect("fill pattern is closed under elimination")
        };
        let mut k_slots = Vec::new();
        let mut k_vals = Vec::new();
        for i in 0..n {
            for &(j, v) in &k.rows[i] {
                if i < j {
                    let (a, b) = (iperm[i].min(iperm[j]), iperm[i].max(iperm[j]));
                    k_slots.push(n + slot(a, b));
                    k_vals.push(v);
                }
            }
        }
        let mut upd_ptr = vec![0usize; n + 1];
        let mut upd_tgt = Vec::new();
        for c in 0..n {
            let rows = &row_idx[col_ptr[c]..col_ptr[c + 1]];
            for a in 0..rows.len() {
                for b in a..rows.len() {
                    let t = if a == b { rows[a] } else { n + slot(rows[a], rows[b]) };
                    upd_tgt.push(t as u32);
                }
            }
            upd_ptr[c + 1] = upd_tgt.len();
        }
        let k_diag_new = order.iter().map(|&o| k.diag[o]).collect();
        let m_new = order.iter().map(|&o| mass[o]).collect();
        let vals = vec![0.0; n + row_idx.len()];
        Ldl { n, perm: order, col_ptr, row_idx, k_slots, k_vals, k_diag_new, m_new, upd_ptr, upd_tgt, vals, pivots_perturbed: 0 }
    }

    /// Number of stored strict-lower entries of `L`.
    pub fn fill(&self) -> usize {
        self.row_idx.len()
    }

    pub fn pivots_perturbed(&self) -> usize {
        self.pivots_perturbed
    }

    /// Factorizes `K − σM` and returns the number of negative pivots, which by
    /// Sylvester's law of inertia is the number of eigenvalues below `σ`.
    pub fn factor(&mut self, sigma: f64) -> usize {
        let n = self.n;
        for k in 0..n {
            self.vals[k] = self.k_diag_new[k] - sigma * self.m_new[k];
        }
        for v in self.vals[n..].iter_mut() {
            *v = 0.0;
        }
        for (&s, &v) in self.k_slots.iter().zip(&self.k_vals) {
            self.vals[s] += v;
        }
        let mut negative = 0;
        self.pivots_perturbed = 0;
        for c in 0..n {
            let scale = self.k_diag_new[c].abs() + sigma.abs() * self.m_new[c];
            let mut d = self.vals[c];
            let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
            if d.abs() < tiny {
                d = if d > 0.0 { tiny } else { -tiny };
                self.pivots_perturbed += 1;
            }
            self.vals[c] = d;
            if d < 0.0 {
                negative += 1;
            }
            let (lo, hi) = (n + self.col_ptr[c], n + self.col_ptr[c + 1]);
            let len = hi - lo;
            let mut u = self.upd_ptr[c];
            for a in 0..len {
                let ca = self.vals[lo + a] / d;
                for b in a..len {
                    let cb = self.vals[lo + b];
                    let t = self.upd_tgt[u] as usize;
                    self.vals[t] -= ca * cb;
                    u += 1;
                }
            }
            for a in lo..hi {
                self.vals[a] /= d;
            }
        }
        negative
    }

    /// Solves `(K − σM) x = b` with the last factorization.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for c in 0..n {
            let yc = y[c];
            if yc != 0.0 {
                for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                    y[self.row_idx[p]] -= self.vals[n + p] * yc;
                }
            }
        }
        for c in 0..n {
            y[c] /= self.vals[c];
        }
        for c in (0..n).rev() {
            let mut s = y[c];
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                s -= self.vals[n + p] * y[self.row_idx[p]];
            }
            y[c] = s;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}
