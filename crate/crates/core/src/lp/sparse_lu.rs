//! Sparse LU factorization over exact rationals.
//!
//! Right-looking elimination. Each step pivots on a shortest remaining row and,
//! within it, the column with the fewest remaining entries. Eliminations are
//! stored as eta vectors so both `B z = r` and `Bᵀ y = g` can be solved.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{zero, Rational};

type SparseRow = Vec<(usize, Rational)>;

#[derive(Clone, Debug)]
pub struct SparseLu {
    m: usize,
    piv_row: Vec<usize>,
    piv_col: Vec<usize>,
    etas: Vec<Vec<(usize, Rational)>>,
    u_rows: Vec<SparseRow>,
    diag: Vec<Rational>,
}

/// `a - f * b` for sorted sparse rows, skipping column `drop`.
fn axpy(a: &SparseRow, f: &Rational, b: &SparseRow, drop: usize) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        let (col, v) = if ca < cb {
            i += 1;
            (ca, a[i - 1].1.clone())
        } else if cb < ca {
            j += 1;
            (cb, -(f * &b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ca, &a[i - 1].1 - f * &b[j - 1].1)
        };
        if col != drop && !v.is_zero() {
            out.push((col, v));
        }
    }
    out
}

impl SparseLu {
    /// Factors the square matrix whose `k`-th column is `cols[k]` (entries are
    /// `(row, value)` with rows in `0..m`).
    pub fn factor(m: usize, cols: &[&[(usize, Rational)]]) -> Result<Self> {
        if cols.len() != m {
            return Err(Error::Solver(format!("basis has {} columns for {m} rows", cols.len())));
        }
        let mut rows: Vec<SparseRow> = vec![Vec::new(); m];
        for (k, col) in cols.iter().enumerate() {
            for (i, v) in col.iter() {
                if !v.is_zero() {
                    rows[*i].push((k, v.clone()));
                }
            }
        }
        for r in rows.iter_mut() {
            r.sort_by_key(|e| e.0);
        }
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; m];
        for (i, r) in rows.iter().enumerate() {
            for (k, _) in r {
                col_rows[*k].push(i);
                col_count[*k] += 1;
            }
        }
        let mut row_active = vec![true; m];
        let mut lu = SparseLu {
            m,
            piv_row: Vec::with_capacity(m),
            piv_col: Vec::with_capacity(m),
            etas: Vec::with_capacity(m),
            u_rows: Vec::with_capacity(m),
            diag: Vec::with_capacity(m),
        };
        for _step in 0..m {
            let mut best: Option<(usize, usize)> = None;
            for (i, r) in rows.iter().enumerate() {
                if !row_active[i] {
                    continue;
                }
                if best.is_none_or(|(_, len)| r.len() < len) {
                    best = Some((i, r.len()));
                    if r.len() <= 1 {
                        break;
                    }
                }
            }
            let (pr, len) = best.expect("an active row remains");
            if len == 0 {
                return Err(Error::Solver(format!("singular basis: row {pr} is dependent")));
            }
            let (pos, _) = rows[pr]
                .iter()
                .enumerate()
                .min_by_key(|(_, (k, _))| (col_count[*k], *k))
                .expect("nonempty row");
            let pc = rows[pr][pos].0;
            let pivot = rows[pr][pos].1.clone();
            let prow = std::mem::take(&mut rows[pr]);
            row_active[pr] = false;
            for (k, _) in &prow {
                col_count[*k] -= 1;
            }
            let mut eta = Vec::new();
            let mut candidates = std::mem::take(&mut col_rows[pc]);
            candidates.sort_unstable();
            candidates.dedup();
            for i in candidates {
                if !row_active[i] {
                    continue;
                }
                let Ok(at) = rows[i].binary_search_by_key(&pc, |e| e.0) else {
                    continue;
                };
                let f = &rows[i][at].1 / &pivot;
                let old = std::mem::take(&mut rows[i]);
                let new = axpy(&old, &f, &prow, pc);
                // Keep per-column counts and candidate lists current.
                let (mut a, mut b) = (0, 0);
                while a < old.len() || b < new.len() {
                    let ca = old.get(a).map_or(usize::MAX, |e| e.0);
                    let cb = new.get(b).map_or(usize::MAX, |e| e.0);
                    if ca == cb {
                        a += 1;
                        b += 1;
                    } else if ca < cb {
                        col_count[ca] -= 1;
                        a += 1;
                    } else {
                        col_count[cb] += 1;
                        col_rows[cb].push(i);
                        b += 1;
                    }
                }
                rows[i] = new;
                eta.push((i, f));
            }
            lu.piv_row.push(pr);
            lu.piv_col.push(pc);
            lu.etas.push(eta);
            lu.u_rows.push(prow.into_iter().filter(|(k, _)| *k != pc).collect());
            lu.diag.push(pivot);
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Solves `B z = rhs`; `rhs` is indexed by row, `z` by basis column.
    pub fn solve(&self, rhs: &[Rational]) -> Vec<Rational> {
        let mut w = rhs.to_vec();
        for k in 0..self.m {
            let t = w[self.piv_row[k]].clone();
            if t.is_zero() {
                continue;
            }
            for (i, l) in &self.etas[k] {
                w[*i] -= l * &t;
            }
        }
        let mut z = vec![zero(); self.m];
        for k in (0..self.m).rev() {
            let mut s = w[self.piv_row[k]].clone();
            for (c, u) in &self.u_rows[k] {
                if !z[*c].is_zero() {
                    s -= u * &z[*c];
                }
            }
            z[self.piv_col[k]] = s / &self.diag[k];
        }
        z
    }

    /// Solves `Bᵀ y = rhs`; `rhs` is indexed by basis column, `y` by row.
    pub fn solve_transpose(&self, rhs: &[Rational]) -> Vec<Rational> {
        let mut g = rhs.to_vec();
        let mut v = vec![zero(); self.m];
        for k in 0..self.m {
            let w = &g[self.piv_col[k]] / &self.diag[k];
            if !w.is_zero() {
                for (c, u) in &self.u_rows[k] {
                    g[*c] -= u * &w;
                }
            }
            v[self.piv_row[k]] = w;
        }
        for k in (0..self.m).rev() {
            let mut acc = zero();
            for (i, l) in &self.etas[k] {
                if !v[*i].is_zero() {
                    acc += l * &v[*i];
                }
            }
            if !acc.is_zero() {
                v[self.piv_row[k]] -= acc;
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn dense_cols(a: &[&[i64]]) -> Vec<Vec<(usize, Rational)>> {
        let m = a.len();
        (0..m)
            .map(|k| (0..m).filter(|&i| a[i][k] != 0).map(|i| (i, int(a[i][k]))).collect())
            .collect()
    }

    #[test]
    fn solves_both_systems() {
        let a: [&[i64]; 4] = [&[2, 0, 1, 0], &[1, 3, 0, 0], &[0, 1, 4, 1], &[0, 0, 1, 5]];
        let cols = dense_cols(&a);
        let refs: Vec<&[(usize, Rational)]> = cols.iter().map(|c| c.as_slice()).collect();
        let lu = SparseLu::factor(4, &refs).unwrap();
        let rhs = vec![int(1), rat(1, 2), int(-3), int(7)];
        let z = lu.solve(&rhs);
        for i in 0..4 {
            let s: Rational = (0..4).map(|k| int(a[i][k]) * &z[k]).sum();
            assert_eq!(s, rhs[i]);
        }
        let y = lu.solve_transpose(&rhs);
        for k in 0..4 {
            let s: Rational = (0..4).map(|i| int(a[i][k]) * &y[i]).sum();
            assert_eq!(s, rhs[k]);
        }
    }

    #[test]
    fn rejects_singular() {
        let a: [&[i64]; 3] = [&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]];
        let cols = dense_cols(&a);
        let refs: Vec<&[(usize, Rational)]> = cols.iter().map(|c| c.as_slice()).collect();
        assert!(SparseLu::factor(3, &refs).is_err());
    }
}
