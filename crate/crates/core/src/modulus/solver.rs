//! Independent numerical fat-flow modulus.
//!
//! Minimizes `sum w^2` subject to every inner-to-outer fat path having
//! weight at least 1; the modulus is the reciprocal of the optimum. Paths
//! enter as cutting planes found by the shortest-path oracle. The
//! restricted problem is solved through its dual
//! `min 1/2 l'Gl - 1'l, l >= 0` with `G = N'N` (`N` the tile-path incidence
//! matrix) by an active-set method warm-started across rounds; the primal
//! weights are `w = N l`, so `w >= 0` holds automatically.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::expansion::Annulus;

use super::shortest_crossing;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverStep {
    /// `sum w^2` of the restricted optimum.
    pub sum_sq: f64,
    /// Oracle length of the shortest path under that optimum.
    pub shortest: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub n: usize,
    /// `H^2 / A` of the final weights; never above the modulus.
    pub lower: f64,
    /// `1 / sum w^2` of the restricted optimum; never below the modulus.
    pub upper: f64,
    pub gap: f64,
    pub weights: Vec<f64>,
    pub paths: usize,
    pub history: Vec<SolverStep>,
}

impl SolverReport {
    pub fn estimate(&self) -> f64 {
        self.upper
    }
}

/// Cholesky factor of the Gram matrix of the passive paths, kept in
/// packed lower-triangular rows.
#[derive(Default)]
struct Factor {
    rows: Vec<Vec<f64>>,
}

impl Factor {
    /// Appends a row/column `(g, diag)`; refuses numerically dependent ones.
    fn push(&mut self, g: &[f64], diag: f64) -> bool {
        let l = self.forward(g);
        let d2 = diag - l.iter().map(|x| x * x).sum::<f64>();
        if d2 <= 1e-10 * diag {
            return false;
        }
        let mut row = l;
        row.push(d2.sqrt());
        self.rows.push(row);
        true
    }

    /// Deletes row/column `i`, restoring triangularity by a rank-one update
    /// of the trailing block.
    fn remove(&mut self, i: usize) {
        let mut v: Vec<f64> = self.rows[i + 1..].iter().map(|r| r[i]).collect();
        self.rows.remove(i);
        for r in &mut self.rows[i..] {
            r.remove(i);
        }
        for k in 0..v.len() {
            let row = i + k;
            let lkk = self.rows[row][i + k];
            let r = lkk.hypot(v[k]);
            let (c, s) = (r / lkk, v[k] / lkk);
            self.rows[row][i + k] = r;
            for j in k + 1..v.len() {
                let below = &mut self.rows[i + j][i + k];
                *below = (*below + s * v[j]) / c;
                v[j] = c * v[j] - s * *below;
            }
        }
    }

    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(b.len());
        for (i, row) in self.rows.iter().enumerate() {
            let s: f64 = row[..i].iter().zip(&y).map(|(a, b)| a * b).sum();
            y.push((b[i] - s) / row[i]);
        }
        y
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.forward(b);
        for i in (0..x.len()).rev() {
            x[i] /= self.rows[i][i];
            let xi = x[i];
            for (xj, lij) in x[..i].iter_mut().zip(&self.rows[i][..i]) {
                *xj -= lij * xi;
            }
        }
        x
    }
}

struct PathSet {
    paths: Vec<Vec<u32>>,
    /// Paths through each tile.
    by_tile: Vec<Vec<u32>>,
    seen: HashSet<Vec<u32>>,
}

impl PathSet {
    fn add(&mut self, mut path: Vec<u32>) -> Option<usize> {
        path.sort_unstable();
        if !self.seen.insert(path.clone()) {
            return None;
        }
        let id = self.paths.len();
        for &t in &path {
            self.by_tile[t as usize].push(id as u32);
        }
        self.paths.push(path);
        Some(id)
    }

    /// Shared tile counts of path `j` with the paths in `among`.
    fn gram_row(&self, j: usize, among: &[usize]) -> Vec<f64> {
        let mut shared = vec![0u32; self.paths.len()];
        for &t in &self.paths[j] {
            for &i in &self.by_tile[t as usize] {
                shared[i as usize] += 1;
            }
        }
        among.iter().map(|&i| shared[i] as f64).collect()
    }
}

/// Restricted dual solved in place: `lambda` and the passive list are the
/// warm start and are updated.
struct Dual {
    lambda: Vec<f64>,
    passive: Vec<usize>,
    factor: Factor,
    weights: Vec<f64>,
}

impl Dual {
    fn refresh_weights(&mut self, ps: &PathSet) {
        self.weights.iter_mut().for_each(|w| *w = 0.0);
        for &i in &self.passive {
            for &t in &ps.paths[i] {
                self.weights[t as usize] += self.lambda[i];
            }
        }
    }

    fn length(&self, ps: &PathSet, j: usize) -> f64 {
        ps.paths[j].iter().map(|&t| self.weights[t as usize]).sum()
    }

    fn enter(&mut self, ps: &PathSet, j: usize) -> bool {
        let g = ps.gram_row(j, &self.passive);
        if !self.factor.push(&g, ps.paths[j].len() as f64) {
            return false;
        }
        self.passive.push(j);
        true
    }

    fn solve(&mut self, ps: &PathSet, max_steps: usize) -> Result<()> {
        self.lambda.resize(ps.paths.len(), 0.0);
        let mut rejected = HashSet::new();
        for _ in 0..max_steps {
            self.refresh_weights(ps);
            let in_passive: HashSet<usize> = self.passive.iter().copied().collect();
            let entering = (0..ps.paths.len())
                .filter(|j| !in_passive.contains(j) && !rejected.contains(j))
                .map(|j| (j, self.length(ps, j) - 1.0))
                .filter(|&(_, g)| g < -1e-12)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((j, _)) = entering else {
                return Ok(());
            };
            if !self.enter(ps, j) {
                rejected.insert(j);
                continue;
            }
            loop {
                let s = self.factor.solve(&vec![1.0; self.passive.len()]);
                if s.iter().all(|&x| x > 0.0) {
                    for (&i, &x) in self.passive.iter().zip(&s) {
                        self.lambda[i] = x;
                    }
                    break;
                }
                let mut alpha = 1.0f64;
                for (&i, &x) in self.passive.iter().zip(&s) {
                    if x <= 0.0 {
                        alpha = alpha.min(self.lambda[i] / (self.lambda[i] - x));
                    }
                }
                for (&i, &x) in self.passive.iter().zip(&s) {
                    self.lambda[i] += alpha * (x - self.lambda[i]);
                }
                let mut k = 0;
                while k < self.passive.len() {
                    let i = self.passive[k];
                    if self.lambda[i] <= 1e-14 {
                        self.lambda[i] = 0.0;
                        self.passive.remove(k);
                        self.factor.remove(k);
                    } else {
                        k += 1;
                    }
                }
                if self.passive.is_empty() {
                    break;
                }
            }
            if !self.passive.contains(&j) {
                rejected.insert(j);
            }
        }
        Err(Error::InvalidArgument(
            "restricted quadratic program did not settle".into(),
        ))
    }
}

/// Cutting-plane fat-flow modulus of an annulus. Stops once the oracle finds
/// no path shorter than `1 - tol`; at most `10 * |tiles|` rounds.
pub fn optimize_modulus(a: &Annulus, tol: f64) -> Result<SolverReport> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let mut ps = PathSet {
        paths: Vec::new(),
        by_tile: vec![Vec::new(); a.len()],
        seen: HashSet::new(),
    };
    let mut dual = Dual {
        lambda: Vec::new(),
        passive: Vec::new(),
        factor: Factor::default(),
        weights: vec![0.0; a.len()],
    };
    let mut history = Vec::new();
    let cap = 10 * a.len().max(1);
    for _ in 0..cap {
        let (shortest, path) = shortest_crossing(a, &dual.weights).ok_or(Error::Disconnected)?;
        let sum_sq: f64 = dual.weights.iter().map(|w| w * w).sum();
        if !ps.paths.is_empty() {
            history.push(SolverStep { sum_sq, shortest });
        }
        if shortest >= 1.0 - tol {
            let upper = 1.0 / sum_sq;
            let lower = shortest.min(1.0).powi(2) / sum_sq;
            return Ok(SolverReport {
                n: a.n,
                lower,
                upper,
                gap: upper - lower,
                weights: dual.weights,
                paths: ps.paths.len(),
                history,
            });
        }
        if ps.add(path).is_none() {
            return Err(Error::IterationCap {
                primal: sum_sq,
                shortest,
            });
        }
        dual.solve(&ps, 20 * (ps.paths.len() + 10))?;
        dual.refresh_weights(&ps);
    }
    let sum_sq = dual.weights.iter().map(|w| w * w).sum();
    let shortest = shortest_crossing(a, &dual.weights).map_or(0.0, |p| p.0);
    Err(Error::IterationCap {
        primal: sum_sq,
        shortest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{build_tower, default_seed};
    use crate::rules::{builtin, make_rpq, SubdivisionRule};
    use crate::subdivision::Limits;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    fn annulus(rule: &SubdivisionRule, n: usize) -> Annulus {
        let seed = default_seed(rule, 1, &Limits::default()).unwrap().unwrap();
        build_tower(rule, seed, n, Limits::default())
            .unwrap()
            .annulus(n)
            .unwrap()
    }

    /// Tile sets of all simple inner-to-outer paths that contain no smaller
    /// such path.
    fn minimal_paths(a: &Annulus) -> Vec<Vec<u32>> {
        fn walk(a: &Annulus, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            let t = *path.last().unwrap();
            if a.outer[t as usize] {
                let mut set = path.clone();
                set.sort_unstable();
                out.push(set);
                return;
            }
            for &u in &a.graph.neighbors[t as usize] {
                if !path.contains(&u) {
                    path.push(u);
                    walk(a, path, out);
                    path.pop();
                }
            }
        }
        let mut all = Vec::new();
        for t in 0..a.len() as u32 {
            if a.inner[t as usize] {
                walk(a, &mut vec![t], &mut all);
            }
        }
        all.sort();
        all.dedup();
        let contains =
            |big: &[u32], small: &[u32]| small.iter().all(|x| big.binary_search(x).is_ok());
        all.iter()
            .filter(|p| !all.iter().any(|q| q.len() < p.len() && contains(p, q)))
            .cloned()
            .collect()
    }

    /// Exact `min sum w^2` over `{w : every path has weight >= 1}` by trying
    /// every candidate active set: `w = N_S l` with `G_SS l = 1`, `l >= 0`.
    fn brute_force_modulus(a: &Annulus) -> BigRational {
        let paths = minimal_paths(a);
        assert!(paths.len() <= 16, "{} paths", paths.len());
        let r = |x: usize| BigRational::from_integer(x.into());
        let mut best: Option<BigRational> = None;
        for mask in 1u32..(1 << paths.len()) {
            let set: Vec<usize> = (0..paths.len()).filter(|i| mask >> i & 1 == 1).collect();
            let k = set.len();
            let mut m: Vec<Vec<BigRational>> = set
                .iter()
                .map(|&i| {
                    let mut row: Vec<BigRational> = set
                        .iter()
                        .map(|&j| r(paths[i].iter().filter(|t| paths[j].contains(t)).count()))
                        .collect();
                    row.push(BigRational::one());
                    row
                })
                .collect();
            let mut singular = false;
            for c in 0..k {
                let Some(p) = (c..k).find(|&i| !m[i][c].is_zero()) else {
                    singular = true;
                    break;
                };
                m.swap(c, p);
                for i in 0..k {
                    if i != c && !m[i][c].is_zero() {
                        let f = &m[i][c] / &m[c][c];
                        for j in c..=k {
                            let d = &f * &m[c][j];
                            m[i][j] -= d;
                        }
                    }
                }
            }
            if singular {
                continue;
            }
            let lambda: Vec<BigRational> = (0..k).map(|i| &m[i][k] / &m[i][i]).collect();
            if lambda.iter().any(|l| l.is_negative()) {
                continue;
            }
            let mut w = vec![BigRational::zero(); a.len()];
            for (&i, l) in set.iter().zip(&lambda) {
                for &t in &paths[i] {
                    w[t as usize] += l;
                }
            }
            let feasible = paths.iter().all(|p| {
                p.iter().map(|&t| &w[t as usize]).sum::<BigRational>() >= BigRational::one()
            });
            if feasible {
                let sq: BigRational = w.iter().map(|x| x * x).sum();
                if best.as_ref().is_none_or(|b| sq < *b) {
                    best = Some(sq);
                }
            }
        }
        best.unwrap().recip()
    }

    #[test]
    fn brute_force_agreement() {
        for (rule, n, expect) in [
            (builtin("R1").unwrap(), 1, (1, 4)),
            (builtin("R1").unwrap(), 2, (3, 8)),
            (make_rpq(2, 3).unwrap(), 1, (1, 4)),
            (builtin("pentagonal").unwrap(), 1, (1, 5)),
        ] {
            let a = annulus(&rule, n);
            let exact = brute_force_modulus(&a);
            assert_eq!(exact, BigRational::new(expect.0.into(), expect.1.into()));
            let r = optimize_modulus(&a, DEFAULT_TOLERANCE).unwrap();
            assert!((r.estimate() - exact.to_f64().unwrap()).abs() < 1e-9);
        }
        // a one-tile-wide ring: every tile is a path on its own
        let a = annulus(&make_rpq(2, 3).unwrap(), 1);
        assert_eq!(minimal_paths(&a).len(), a.len());
    }

    #[test]
    fn bounds_bracket_and_history() {
        let a = annulus(&builtin("R1").unwrap(), 3);
        let r = optimize_modulus(&a, DEFAULT_TOLERANCE).unwrap();
        assert!(r.lower <= r.upper && r.gap >= 0.0 && r.gap < 1e-5);
        assert!((r.upper - 7.0 / 16.0).abs() < 1e-6);
        assert!(r.weights.iter().all(|&w| w >= 0.0));
        assert!(r
            .history
            .windows(2)
            .all(|s| s[1].sum_sq >= s[0].sum_sq * (1.0 - 1e-12)));
        assert!(optimize_modulus(&a, 0.0).is_err());
        assert!(optimize_modulus(&a, 1.5).is_err());
    }

    #[test]
    fn factor_updates_match_refactorization() {
        // Gram matrix of five 0/1 vectors over six tiles
        let vecs = [
            [1, 1, 0, 0, 1, 0],
            [0, 1, 1, 0, 0, 1],
            [1, 0, 1, 1, 0, 0],
            [0, 0, 0, 1, 1, 1],
            [1, 1, 0, 1, 0, 0],
        ];
        let dot =
            |a: &[i32; 6], b: &[i32; 6]| a.iter().zip(b).map(|(x, y)| (x * y) as f64).sum::<f64>();
        let mut f = Factor::default();
        for (i, v) in vecs.iter().enumerate() {
            let g: Vec<f64> = vecs[..i].iter().map(|u| dot(u, v)).collect();
            assert!(f.push(&g, dot(v, v)));
        }
        f.remove(1);
        let keep = [0, 2, 3, 4];
        let mut fresh = Factor::default();
        for (k, &i) in keep.iter().enumerate() {
            let g: Vec<f64> = keep[..k].iter().map(|&j| dot(&vecs[j], &vecs[i])).collect();
            assert!(fresh.push(&g, dot(&vecs[i], &vecs[i])));
        }
        for (r, s) in f.rows.iter().zip(&fresh.rows) {
            for (x, y) in r.iter().zip(s) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let x = f.solve(&[1.0; 4]);
        let y = fresh.solve(&[1.0; 4]);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
        // a dependent vector is refused
        let mut g = Factor::default();
        g.push(&[], 2.0);
        assert!(!g.push(&[2.0], 2.0));
    }
}
