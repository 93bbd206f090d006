//! Block-sparse direct solver: minimum-degree ordering on the block graph and
//! right-looking block LU with partial pivoting inside the diagonal blocks.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// A square matrix made of `bs × bs` dense blocks on a fixed, structurally
/// symmetric block pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix {
    bs: usize,
    /// Per block row, sorted `(block column, slot)` pairs.
    rows: Vec<Vec<(usize, usize)>>,
    data: Vec<f64>,
}

impl BlockSparseMatrix {
    /// A zero matrix whose pattern is the diagonal plus the given block pairs
    /// (symmetrized).
    pub fn new(n_blocks: usize, bs: usize, pairs: &[(usize, usize)]) -> Self {
        let mut sets: Vec<BTreeSet<usize>> = (0..n_blocks).map(|i| BTreeSet::from([i])).collect();
        for &(i, j) in pairs {
            sets[i].insert(j);
            sets[j].insert(i);
        }
        let mut slot = 0;
        let rows = sets
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|j| {
                        slot += 1;
                        (j, slot - 1)
                    })
                    .collect()
            })
            .collect();
        BlockSparseMatrix {
            bs,
            rows,
            data: vec![0.0; slot * bs * bs],
        }
    }

    pub fn block_size(&self) -> usize {
        self.bs
    }

    pub fn n_blocks(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows.len() * self.bs
    }

    pub fn block_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c)
            .ok()
            .map(|p| row[p].1)
    }

    /// Row-major block `(i, j)`, if it is in the pattern.
    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        let b2 = self.bs * self.bs;
        self.slot(i, j).map(|s| &self.data[s * b2..(s + 1) * b2])
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let b2 = self.bs * self.bs;
        let s = self.slot(i, j).expect("block outside the sparsity pattern");
        &mut self.data[s * b2..(s + 1) * b2]
    }

    /// Adds `value` to scalar entry `(r, c)` of block `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, r: usize, c: usize, value: f64) {
        let bs = self.bs;
        self.block_mut(i, j)[r * bs + c] += value;
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().map(|&(j, _)| j)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let bs = self.bs;
        let mut y = vec![0.0; self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            let yi = &mut y[i * bs..(i + 1) * bs];
            for &(j, s) in row {
                let blk = &self.data[s * bs * bs..(s + 1) * bs * bs];
                let xj = &x[j * bs..(j + 1) * bs];
                for r in 0..bs {
                    yi[r] += blk[r * bs..(r + 1) * bs]
                        .iter()
                        .zip(xj)
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
                }
            }
        }
        y
    }

    /// Dense copy, row-major; for tests and small systems.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let bs = self.bs;
        let mut out = vec![0.0; n * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, s) in row {
                for r in 0..bs {
                    for c in 0..bs {
                        out[(i * bs + r) * n + j * bs + c] = self.data[s * bs * bs + r * bs + c];
                    }
                }
            }
        }
        out
    }
}

/// Minimum-degree elimination order of the block graph (ties broken by the
/// lowest block id) together with the filled pattern: for each pivot, its
/// not-yet-eliminated neighbours at elimination time.
pub fn minimum_degree(adjacency: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = adjacency.len();
    let mut adj: Vec<BTreeSet<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(i, a)| a.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
    let mut order = Vec::with_capacity(n);
    let mut fill = Vec::with_capacity(n);
    while let Some((_, k)) = queue.pop_first() {
        let nbrs: Vec<usize> = adj[k].iter().copied().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&k);
            for &w in &nbrs {
                if w != u {
                    adj[u].insert(w);
                }
            }
            queue.insert((adj[u].len(), u));
        }
        adj[k].clear();
        order.push(k);
        fill.push(nbrs);
    }
    (order, fill)
}

/// Dense LU with partial pivoting of a row-major `n × n` matrix, in place.
#[derive(Debug, Clone)]
struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return None;
        }
        let mut piv = vec![0; n];
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].abs());
            for r in k + 1..n {
                let v = a[r * n + k].abs();
                if v > best {
                    p = r;
                    best = v;
                }
            }
            if best <= 1e-14 * scale {
                return None;
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let l = a[r * n + k] / d;
                a[r * n + k] = l;
                if l != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= l * a[k * n + c];
                    }
                }
            }
        }
        Some(DenseLu { n, lu: a, piv })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu[r * n + c] * b[c]).sum();
            b[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| self.lu[r * n + c] * b[c]).sum();
            b[r] = (b[r] - s) / self.lu[r * n + r];
        }
    }

    /// Solves for every column of a row-major `n × m` right-hand side.
    fn solve_columns(&self, b: &mut [f64], m: usize) {
        let n = self.n;
        let mut col = vec![0.0; n];
        for j in 0..m {
            for r in 0..n {
                col[r] = b[r * m + j];
            }
            self.solve_in_place(&mut col);
            for r in 0..n {
                b[r * m + j] = col[r];
            }
        }
    }
}

/// Block LU factorization of a [`BlockSparseMatrix`].
#[derive(Debug, Clone)]
pub struct BlockLu {
    bs: usize,
    order: Vec<usize>,
    diag: Vec<DenseLu>,
    /// Per pivot step: later neighbours `u`, with `L_{u,k}` and `D_k^{-1} U_{k,u}`.
    lower: Vec<Vec<(usize, Vec<f64>)>>,
    upper: Vec<Vec<(usize, Vec<f64>)>>,
}

impl BlockLu {
    pub fn factor(a: &BlockSparseMatrix) -> Result<Self> {
        let n = a.n_blocks();
        let bs = a.bs;
        let b2 = bs * bs;
        let adjacency: Vec<Vec<usize>> = (0..n).map(|i| a.neighbors(i).collect()).collect();
        let (order, fill) = minimum_degree(&adjacency);

        // Working storage on the filled pattern.
        let mut pattern: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for (step, &k) in order.iter().enumerate() {
            for &u in &fill[step] {
                pattern[k].insert(u);
                pattern[u].insert(k);
                for &w in &fill[step] {
                    pattern[u].insert(w);
                }
            }
        }
        let mut work = BlockSparseMatrix {
            bs,
            rows: Vec::with_capacity(n),
            data: Vec::new(),
        };
        let mut slot = 0;
        for set in pattern {
            work.rows.push(
                set.into_iter()
                    .map(|j| {
                        slot += 1;
                        (j, slot - 1)
                    })
                    .collect(),
            );
        }
        work.data = vec![0.0; slot * b2];
        for i in 0..n {
            for j in a.neighbors(i) {
                work.block_mut(i, j)
                    .copy_from_slice(a.block(i, j).expect("in pattern"));
            }
        }

        let mut diag = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut tmp = vec![0.0; b2];
        for (step, &k) in order.iter().enumerate() {
            let d = DenseLu::factor(work.block(k, k).expect("diagonal").to_vec(), bs)
                .ok_or(Error::SingularBlock { block: k })?;
            let nbrs = &fill[step];
            let mut ups = Vec::with_capacity(nbrs.len());
            let mut lows = Vec::with_capacity(nbrs.len());
            for &u in nbrs {
                let mut x = work.block(k, u).expect("filled").to_vec();
                d.solve_columns(&mut x, bs);
                ups.push((u, x));
                lows.push((u, work.block(u, k).expect("filled").to_vec()));
            }
            for (u, l) in &lows {
                for (w, x) in &ups {
                    // tmp = L_{u,k} X_w
                    tmp.iter_mut().for_each(|t| *t = 0.0);
                    for r in 0..bs {
                        for m in 0..bs {
                            let lv = l[r * bs + m];
                            if lv == 0.0 {
                                continue;
                            }
                            let xrow = &x[m * bs..(m + 1) * bs];
                            let trow = &mut tmp[r * bs..(r + 1) * bs];
                            for (t, xv) in trow.iter_mut().zip(xrow) {
                                *t += lv * xv;
                            }
                        }
                    }
                    for (dst, t) in work.block_mut(*u, *w).iter_mut().zip(&tmp) {
                        *dst -= t;
                    }
                }
            }
            diag.push(d);
            lower.push(lows);
            upper.push(ups);
        }
        Ok(BlockLu {
            bs,
            order,
            diag,
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.order.len() * self.bs
    }

    /// Number of stored off-diagonal blocks in `L` and `U`.
    pub fn fill_blocks(&self) -> usize {
        self.lower.iter().map(Vec::len).sum::<usize>()
            + self.upper.iter().map(Vec::len).sum::<usize>()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let bs = self.bs;
        let mut b = rhs.to_vec();
        // Forward: z_k = D_k^{-1} b_k, then b_u -= L_{u,k} z_k.
        for (step, &k) in self.order.iter().enumerate() {
            let (head, tail) = (k * bs, (k + 1) * bs);
            self.diag[step].solve_in_place(&mut b[head..tail]);
            let z: Vec<f64> = b[head..tail].to_vec();
            for (u, l) in &self.lower[step] {
                let bu = &mut b[u * bs..(u + 1) * bs];
                for r in 0..bs {
                    bu[r] -= l[r * bs..(r + 1) * bs]
                        .iter()
                        .zip(&z)
                        .map(|(a, c)| a * c)
                        .sum::<f64>();
                }
            }
        }
        // Backward: x_k = z_k - sum_u X_u x_u.
        for (step, &k) in self.order.iter().enumerate().rev() {
            let mut acc = vec![0.0; bs];
            for (u, x) in &self.upper[step] {
                let xu = &b[u * bs..(u + 1) * bs];
                for r in 0..bs {
                    acc[r] += x[r * bs..(r + 1) * bs]
                        .iter()
                        .zip(xu)
                        .map(|(a, c)| a * c)
                        .sum::<f64>();
                }
            }
            for (dst, a) in b[k * bs..(k + 1) * bs].iter_mut().zip(&acc) {
                *dst -= a;
            }
        }
        b
    }
}
