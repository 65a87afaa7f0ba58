//! Sparse LDL^T for quasi-definite systems.
//!
//! Up-looking factorization over an elimination tree, after a deterministic
//! minimum-degree ordering. The ordering and symbolic analysis are done once;
//! refactoring with new values reuses both.

use std::collections::BTreeSet;

const NONE: usize = usize::MAX;

/// Symmetric matrix stored as its upper triangle, compressed by column.
#[derive(Debug, Clone)]
pub(crate) struct SymCsc {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SymCsc {
    /// Build from `(row, col, value)` triplets with `row <= col`. Duplicates
    /// are summed. Every diagonal entry is stored, zero or not.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        entries.extend((0..n).map(|i| (i, i, 0.0)));
        for e in &entries {
            assert!(e.0 <= e.1 && e.1 < n, "triplet ({}, {}) not in upper triangle", e.0, e.1);
        }
        entries.sort_by_key(|e| (e.1, e.0));
        let mut col_ptr = vec![0; n + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Index into `values` of entry `(row, col)`, `row <= col`.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        self.row_idx[range.clone()]
            .binary_search(&row)
            .ok()
            .map(|k| range.start + k)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[p];
                let v = self.values[p];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[p];
                if r != c {
                    adj[r].push(c);
                    adj[c].push(r);
                }
            }
        }
        adj
    }
}

/// Greedy minimum-degree ordering with explicit fill. Ties break on the
/// lower index, so the result is deterministic. Nodes whose initial degree
/// exceeds `max(16, 10 sqrt(n))` are ordered last.
///
/// Returns `perm` with `perm[new] = old`.
pub(crate) fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let threshold = 16usize.max((10.0 * (n as f64).sqrt()) as usize);
    let dense: Vec<bool> = adj.iter().map(|a| a.len() > threshold).collect();
    let mut sets: Vec<BTreeSet<usize>> = adj
        .iter()
        .enumerate()
        .map(|(v, a)| {
            if dense[v] {
                BTreeSet::new()
            } else {
                a.iter().copied().filter(|&u| !dense[u] && u != v).collect()
            }
        })
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n)
        .filter(|&v| !dense[v])
        .map(|v| (sets[v].len(), v))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut sets[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(sets[u].len(), u));
            sets[u].remove(&v);
            sets[u].extend(nbrs.iter().copied().filter(|&w| w != u));
            queue.insert((sets[u].len(), u));
        }
    }
    order.extend((0..n).filter(|&v| dense[v]));
    order
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ZeroPivot(pub usize);

#[derive(Debug, Clone)]
pub(crate) struct Ldl {
    n: usize,
    perm: Vec<usize>,
    /// Permuted upper-triangular pattern.
    ap: Vec<usize>,
    ai: Vec<usize>,
    ax: Vec<f64>,
    /// `map[k]`: slot in `ax` for entry `k` of the source matrix.
    map: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
    /// Expected pivot sign per permuted index.
    signs: Vec<f64>,
}

impl Ldl {
    /// Order and analyse `k`. `signs[i]` is the expected sign of the pivot of
    /// source index `i` (+1 for primal, -1 for dual rows).
    pub fn analyse(k: &SymCsc, signs: &[f64]) -> Self {
        let n = k.n;
        let perm = minimum_degree(&k.adjacency());
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        let mut counts = vec![0usize; n + 1];
        let mut coords = Vec::with_capacity(k.values.len());
        for c in 0..n {
            for p in k.col_ptr[c]..k.col_ptr[c + 1] {
                let (a, b) = (iperm[k.row_idx[p]], iperm[c]);
                let (r, cc) = if a <= b { (a, b) } else { (b, a) };
                coords.push((r, cc));
                counts[cc + 1] += 1;
            }
        }
        for c in 0..n {
            counts[c + 1] += counts[c];
        }
        let ap = counts.clone();
        let mut next = counts;
        let mut ai = vec![0; coords.len()];
        let mut map = vec![0; coords.len()];
        for (src, &(r, c)) in coords.iter().enumerate() {
            let slot = next[c];
            next[c] += 1;
            ai[slot] = r;
            map[src] = slot;
        }

        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &row in &ai[ap[j]..ap[j + 1]] {
                let mut i = row;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let nnz_l = lp[n];
        Self {
            n,
            signs: perm.iter().map(|&old| signs[old]).collect(),
            perm,
            ap,
            ai,
            ax: vec![0.0; coords.len()],
            map,
            etree,
            lp,
            li: vec![0; nnz_l],
            lx: vec![0.0; nnz_l],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
        }
    }

    /// Numeric factorization of `k` (same pattern as at analysis).
    ///
    /// Pivots that are tiny or carry the wrong sign are replaced by
    /// `sign * delta`. Returns the number of replaced pivots.
    pub fn factor(&mut self, k: &SymCsc, delta: f64) -> Result<usize, ZeroPivot> {
        for (src, &v) in k.values.iter().enumerate() {
            self.ax[self.map[src]] = v;
        }
        let n = self.n;
        let mut y_vals = vec![0.0; n];
        let mut y_used = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();
        let mut bumped = 0;
        for k in 0..n {
            let mut nnz_y = 0;
            self.d[k] = 0.0;
            for p in self.ap[k]..self.ap[k + 1] {
                let b = self.ai[p];
                if b == k {
                    self.d[k] = self.ax[p];
                    continue;
                }
                y_vals[b] = self.ax[p];
                if !y_used[b] {
                    y_used[b] = true;
                    elim[0] = b;
                    let mut nnz_e = 1;
                    let mut next = self.etree[b];
                    while next != NONE && next < k {
                        if y_used[next] {
                            break;
                        }
                        y_used[next] = true;
                        elim[nnz_e] = next;
                        nnz_e += 1;
                        next = self.etree[next];
                    }
                    while nnz_e > 0 {
                        nnz_e -= 1;
                        y_idx[nnz_y] = elim[nnz_e];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let slot = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..slot {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[slot] = k;
                self.lx[slot] = yc * self.dinv[c];
                self.d[k] -= yc * self.lx[slot];
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_used[c] = false;
            }
            let sign = self.signs[k];
            if !(self.d[k] * sign > delta * 1e-3) {
                self.d[k] = sign * delta;
                bumped += 1;
            }
            if self.d[k] == 0.0 || !self.d[k].is_finite() {
                return Err(ZeroPivot(self.perm[k]));
            }
            self.dinv[k] = 1.0 / self.d[k];
        }
        Ok(bumped)
    }

    /// Solve `L D L^T x = b` in place, `b` in source ordering.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let xi = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                x[self.li[j]] -= self.lx[j] * xi;
            }
        }
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut xi = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                xi -= self.lx[j] * x[self.li[j]];
            }
            x[i] = xi;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn dense_of(k: &SymCsc) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; k.n]; k.n];
        for c in 0..k.n {
            for p in k.col_ptr[c]..k.col_ptr[c + 1] {
                m[k.row_idx[p]][c] += k.values[p];
                if k.row_idx[p] != c {
                    m[c][k.row_idx[p]] += k.values[p];
                }
            }
        }
        m
    }

    #[test]
    fn ordering_is_a_permutation() {
        let adj = vec![vec![1, 2, 3], vec![0], vec![0], vec![0]];
        let mut p = minimum_degree(&adj);
        assert_ne!(p[0], 0, "a leaf goes first");
        p.sort();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }

    #[test]
    fn solves_random_quasidefinite() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n1 = rng.random_range(1..8);
            let n2 = rng.random_range(0..6);
            let n = n1 + n2;
            let mut trip = Vec::new();
            let mut signs = vec![1.0; n1];
            signs.extend(vec![-1.0; n2]);
            for i in 0..n1 {
                trip.push((i, i, 1.0 + rng.random::<f64>()));
            }
            for i in n1..n {
                trip.push((i, i, -(0.1 + rng.random::<f64>())));
            }
            for _ in 0..n * 2 {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                let same_block = (a < n1) == (b < n1);
                if a != b && !same_block {
                    trip.push((a.min(b), a.max(b), rng.random::<f64>() - 0.5));
                }
            }
            let k = SymCsc::from_triplets(n, &trip);
            let mut f = Ldl::analyse(&k, &signs);
            assert_eq!(f.factor(&k, 1e-12).unwrap(), 0);
            let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
            let dense = dense_of(&k);
            let mut b: Vec<f64> = dense
                .iter()
                .map(|row| row.iter().zip(&x_true).map(|(a, x)| a * x).sum())
                .collect();
            assert_eq!(b, k.mul(&x_true));
            f.solve(&mut b);
            for (x, t) in b.iter().zip(&x_true) {
                assert!((x - t).abs() < 1e-9, "{x} vs {t}");
            }
        }
    }

    #[test]
    fn wrong_sign_pivot_is_regularized() {
        let k = SymCsc::from_triplets(2, &[(0, 0, 0.0), (1, 1, 0.0)]);
        let mut f = Ldl::analyse(&k, &[1.0, -1.0]);
        assert_eq!(f.factor(&k, 1e-8).unwrap(), 2);
    }
}
