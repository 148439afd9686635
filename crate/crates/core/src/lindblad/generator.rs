use std::collections::VecDeque;

use num_complex::Complex64;

use super::CollapseTerm;
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, Operator};

const ABSENT: u32 = u32::MAX;

/// Row-wise nonzeros of a square matrix.
#[derive(Debug, Clone)]
struct SparseRows {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseRows {
    fn from_dense(m: &CMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v != Complex64::new(0.0, 0.0)).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Column-wise view: for each column, the rows holding a nonzero.
    fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                cols[j].push(i);
            }
        }
        cols
    }

    /// `self† · self`
    fn gram(&self) -> Vec<(usize, usize, Complex64)> {
        let n = self.dim();
        let mut acc = vec![Vec::<(usize, Complex64)>::new(); n];
        for row in &self.rows {
            for &(i, ci) in row {
                for &(j, cj) in row {
                    acc[i].push((j, ci.conj() * cj));
                }
            }
        }
        let mut out = Vec::new();
        for (i, mut entries) in acc.into_iter().enumerate() {
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, Complex64)> = Vec::new();
            for (j, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            out.extend(merged.into_iter().map(|(j, v)| (i, j, v)));
        }
        out
    }
}

/// Sparse master-equation superoperator acting on the matrix elements of ρ
/// that the dynamics can reach from the initial state.
///
/// Writing `H_eff = H − (i/2) Σ C†C`, each target element is
/// `(dρ/dt)_kl = −i Σ_i H_eff[k,i] ρ_il + i Σ_j ρ_kj conj(H_eff[l,j]) + Σ C_ki ρ_ij conj(C_lj)`.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    entries: Vec<(u32, u32)>,
    lookup: Vec<u32>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    coefs: Vec<Complex64>,
    partner: Vec<u32>,
    blocks: Vec<Vec<usize>>,
    untracked_diagonal: bool,
}

impl Generator {
    pub fn new(h: &Operator, terms: &[CollapseTerm], rho0: &CMatrix) -> Result<Self> {
        let dim = h.dim();
        if rho0.nrows() != dim || rho0.ncols() != dim {
            return Err(Error::Layout("initial state does not match the Hamiltonian".into()));
        }
        let mut h_eff = h.matrix().clone();
        let jumps: Vec<SparseRows> = terms
            .iter()
            .map(|t| {
                if t.collapse.dim() != dim {
                    return Err(Error::Layout("collapse operator dimension mismatch".into()));
                }
                Ok(SparseRows::from_dense(t.collapse.matrix()))
            })
            .collect::<Result<_>>()?;
        let minus_half_i = Complex64::new(0.0, -0.5);
        for jump in &jumps {
            for (i, j, v) in jump.gram() {
                h_eff[(i, j)] += minus_half_i * v;
            }
        }
        let h_eff = SparseRows::from_dense(&h_eff);
        let h_cols = h_eff.columns();
        let jump_cols: Vec<Vec<Vec<usize>>> = jumps.iter().map(SparseRows::columns).collect();

        // Closure of the initial support under the generator's coupling graph.
        let mut lookup = vec![ABSENT; dim * dim];
        let mut entries: Vec<(u32, u32)> = Vec::new();
        let mut queue = VecDeque::new();
        let visit = |k: usize, l: usize, lookup: &mut Vec<u32>, entries: &mut Vec<(u32, u32)>, queue: &mut VecDeque<(usize, usize)>| {
            let slot = &mut lookup[k * dim + l];
            if *slot == ABSENT {
                *slot = entries.len() as u32;
                entries.push((k as u32, l as u32));
                queue.push_back((k, l));
            }
        };
        for k in 0..dim {
            for l in 0..dim {
                if rho0[(k, l)] != Complex64::new(0.0, 0.0) {
                    visit(k, l, &mut lookup, &mut entries, &mut queue);
                    visit(l, k, &mut lookup, &mut entries, &mut queue);
                }
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            for &k in &h_cols[i] {
                visit(k, j, &mut lookup, &mut entries, &mut queue);
            }
            for &l in &h_cols[j] {
                visit(i, l, &mut lookup, &mut entries, &mut queue);
            }
            for cols in &jump_cols {
                for &k in &cols[i] {
                    for &l in &cols[j] {
                        visit(k, l, &mut lookup, &mut entries, &mut queue);
                    }
                }
            }
        }

        // Target-major coefficient rows.
        let minus_i = Complex64::new(0.0, -1.0);
        let plus_i = Complex64::new(0.0, 1.0);
        let mut row_start = Vec::with_capacity(entries.len() + 1);
        let mut cols = Vec::new();
        let mut coefs = Vec::new();
        let mut scratch: Vec<(u32, Complex64)> = Vec::new();
        row_start.push(0);
        for &(k, l) in &entries {
            let (k, l) = (k as usize, l as usize);
            scratch.clear();
            for &(i, v) in &h_eff.rows[k] {
                let src = lookup[i * dim + l];
                if src != ABSENT {
                    scratch.push((src, minus_i * v));
                }
            }
            for &(j, v) in &h_eff.rows[l] {
                let src = lookup[k * dim + j];
                if src != ABSENT {
                    scratch.push((src, plus_i * v.conj()));
                }
            }
            for jump in &jumps {
                for &(i, ci) in &jump.rows[k] {
                    for &(j, cj) in &jump.rows[l] {
                        let src = lookup[i * dim + j];
                        if src != ABSENT {
                            scratch.push((src, ci * cj.conj()));
                        }
                    }
                }
            }
            scratch.sort_by_key(|e| e.0);
            let mut last: Option<u32> = None;
            for &(src, v) in &scratch {
                if last == Some(src) {
                    *coefs.last_mut().unwrap() += v;
                } else {
                    cols.push(src);
                    coefs.push(v);
                    last = Some(src);
                }
            }
            row_start.push(cols.len());
        }

        let partner = entries
            .iter()
            .map(|&(k, l)| lookup[l as usize * dim + k as usize])
            .collect();
        let blocks = connected_blocks(dim, &entries);
        let untracked_diagonal = blocks.iter().map(Vec::len).sum::<usize>() < dim;
        Ok(Self {
            dim,
            entries,
            lookup,
            row_start,
            cols,
            coefs,
            partner,
            blocks,
            untracked_diagonal,
        })
    }

    /// Number of tracked matrix elements.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.cols.len()
    }

    /// Groups of basis indices between which ρ can carry coherence. The state
    /// stays block diagonal over these groups.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn apply(&self, y: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_start[r], self.row_start[r + 1]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, v) in self.cols[lo..hi].iter().zip(&self.coefs[lo..hi]) {
                acc += v * y[*c as usize];
            }
            *o = acc;
        }
    }

    /// Pulls the tracked elements out of a dense matrix.
    pub fn gather(&self, m: &CMatrix) -> Vec<Complex64> {
        self.entries
            .iter()
            .map(|&(k, l)| m[(k as usize, l as usize)])
            .collect()
    }

    pub fn scatter(&self, y: &[Complex64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (&(k, l), v) in self.entries.iter().zip(y) {
            m[(k as usize, l as usize)] = *v;
        }
        m
    }

    /// ρ ← (ρ + ρ†)/2 on the tracked elements.
    pub fn symmetrize(&self, y: &mut [Complex64]) {
        for a in 0..y.len() {
            let b = self.partner[a] as usize;
            if b > a {
                let avg = (y[a] + y[b].conj()) * 0.5;
                y[a] = avg;
                y[b] = avg.conj();
            } else if b == a {
                y[a].im = 0.0;
            }
        }
    }

    /// Position of `ρ_kl` in the tracked vector.
    pub fn position(&self, k: usize, l: usize) -> Option<usize> {
        let slot = self.lookup[k * self.dim + l];
        (slot != ABSENT).then_some(slot as usize)
    }

    /// `ρ_kl` read from the tracked vector; untracked elements are zero.
    pub fn element(&self, y: &[Complex64], k: usize, l: usize) -> Complex64 {
        self.position(k, l).map_or(Complex64::new(0.0, 0.0), |p| y[p])
    }

    pub fn trace(&self, y: &[Complex64]) -> Complex64 {
        (0..self.dim).map(|i| self.element(y, i, i)).sum()
    }

    fn block_matrix(&self, y: &[Complex64], block: &[usize], shift: f64) -> CMatrix {
        CMatrix::from_fn(block.len(), block.len(), |r, c| {
            let v = self.element(y, block[r], block[c]);
            if r == c {
                v + shift
            } else {
                v
            }
        })
    }

    /// Smallest eigenvalue of the state held in `y`. Basis states outside
    /// every block contribute a zero eigenvalue.
    pub fn min_eigenvalue(&self, y: &[Complex64]) -> f64 {
        let floor = if self.untracked_diagonal { 0.0 } else { f64::INFINITY };
        self.blocks
            .iter()
            .map(|block| {
                let sub = self.block_matrix(y, block, 0.0);
                sub.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .fold(floor, f64::min)
    }

    /// True when `ρ + τI` admits a Cholesky factorization on every block,
    /// which certifies that no eigenvalue lies below `−τ`.
    pub fn certify_positive(&self, y: &[Complex64], tau: f64) -> bool {
        self.blocks
            .iter()
            .all(|block| is_positive_definite(self.block_matrix(y, block, tau)))
    }

    /// Dense equivalent of [`Generator::apply`] for a full matrix argument.
    pub fn apply_dense(&self, rho: &CMatrix) -> CMatrix {
        let y = self.gather(rho);
        let mut out = vec![Complex64::new(0.0, 0.0); y.len()];
        self.apply(&y, &mut out);
        self.scatter(&out)
    }

    pub fn tracks(&self, k: usize, l: usize) -> bool {
        self.lookup[k * self.dim + l] != ABSENT
    }
}

/// In-place Cholesky of a Hermitian matrix that fails on the first
/// non-positive pivot. Only the lower triangle is read.
fn is_positive_definite(mut m: CMatrix) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut pivot = m[(j, j)].re;
        for k in 0..j {
            pivot -= m[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) {
            return false;
        }
        let root = pivot.sqrt();
        m[(j, j)] = Complex64::new(root, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= m[(i, k)] * m[(j, k)].conj();
            }
            m[(i, j)] = v / root;
        }
    }
    true
}

/// Union-find over basis indices linked by a tracked element. Indices that
/// never appear stay out of every block.
fn connected_blocks(dim: usize, entries: &[(u32, u32)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut used = vec![false; dim];
    for &(k, l) in entries {
        let (k, l) = (k as usize, l as usize);
        used[k] = true;
        used[l] = true;
        let (rk, rl) = (find(&mut parent, k), find(&mut parent, l));
        if rk != rl {
            parent[rk.max(rl)] = rk.min(rl);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; dim];
    for i in 0..dim {
        if !used[i] {
            continue;
        }
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}
