//! Orbit reduction of a linear program under a group of column permutations.
//!
//! If a permutation group maps the feasible set onto itself and fixes the
//! objective, averaging an optimal point over the group gives an optimal point
//! that is constant on orbits. The reduced program has one variable per orbit.
//! Its optimal solution lifts back to the full program: the primal by
//! repetition, the dual by spreading each reduced multiplier evenly over the
//! full rows that collapse onto that reduced row. The lift is valid whenever
//! the full row set is closed under the group, which [`close_rows`] enforces;
//! callers should still check the lifted certificate with
//! [`super::verify_certificate`].

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::{LinProgram, LpSolution, Relation, Status};
use crate::error::{Error, Result};
use crate::rational::{int, zero, Rational};

#[derive(Clone, Debug)]
pub struct Orbits {
    pub of_var: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Orbits {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Orbits of the group generated by `gens`; each generator maps column `j`
    /// to `g[j]`.
    pub fn from_generators(num_vars: usize, gens: &[Vec<usize>]) -> Result<Self> {
        let mut parent: Vec<usize> = (0..num_vars).collect();
        fn find(p: &mut [usize], mut u: usize) -> usize {
            while p[u] != u {
                p[u] = p[p[u]];
                u = p[u];
            }
            u
        }
        for g in gens {
            check_permutation(num_vars, g)?;
            for (j, &gj) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, j), find(&mut parent, gj));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut id = vec![usize::MAX; num_vars];
        let mut of_var = vec![0; num_vars];
        let mut sizes = Vec::new();
        for j in 0..num_vars {
            let r = find(&mut parent, j);
            if id[r] == usize::MAX {
                id[r] = sizes.len();
                sizes.push(0);
            }
            of_var[j] = id[r];
            sizes[id[r]] += 1;
        }
        Ok(Self { of_var, sizes })
    }
}

fn check_permutation(n: usize, g: &[usize]) -> Result<()> {
    if g.len() != n {
        return Err(Error::Invalid(format!("generator has length {}, expected {n}", g.len())));
    }
    let mut seen = vec![false; n];
    for &j in g {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(Error::Invalid("generator is not a permutation".into()));
        }
    }
    Ok(())
}

type Key = (Relation, Vec<(usize, Rational)>);

/// Canonical key and the sign applied to reach it. Equality rows are scaled
/// by ±1 so their leading coefficient is positive.
fn canonical(rel: Relation, mut coeffs: Vec<(usize, Rational)>, rhs: &Rational) -> (Key, Rational, i32) {
    coeffs.sort_by_key(|(j, _)| *j);
    let flip = rel == Relation::Eq && coeffs.first().is_some_and(|(_, a)| a.is_negative());
    if flip {
        coeffs.iter_mut().for_each(|(_, a)| *a = -a.clone());
        ((rel, coeffs), -rhs.clone(), -1)
    } else {
        ((rel, coeffs), rhs.clone(), 1)
    }
}

/// Adds the images of every constraint under the generators until the row set
/// is closed. Fails if an image contradicts an existing row, which means some
/// generator is not a symmetry of the program.
pub fn close_rows(lp: &LinProgram, gens: &[Vec<usize>]) -> Result<LinProgram> {
    for g in gens {
        check_permutation(lp.num_vars(), g)?;
    }
    let mut out = lp.clone();
    let mut seen: HashMap<Key, Rational> = HashMap::new();
    for c in lp.constraints() {
        let (key, rhs, _) = canonical(c.rel, c.coeffs.clone(), &c.rhs);
        if let Some(prev) = seen.insert(key, rhs.clone()) {
            if prev != rhs {
                return Err(Error::Infeasible("program contains contradictory duplicate rows".into()));
            }
        }
    }
    let mut queue: Vec<usize> = (0..lp.constraints().len()).collect();
    while let Some(i) = queue.pop() {
        let c = out.constraints()[i].clone();
        for g in gens {
            let image: Vec<(usize, Rational)> = c.coeffs.iter().map(|(j, a)| (g[*j], a.clone())).collect();
            let (key, rhs, sign) = canonical(c.rel, image, &c.rhs);
            match seen.get(&key) {
                Some(prev) if *prev == rhs => {}
                Some(_) => {
                    return Err(Error::Invalid(format!(
                        "column permutation maps constraint {i} onto a conflicting row"
                    )))
                }
                None => {
                    let coeffs = key.1.iter().map(|(j, a)| (*j, if sign < 0 { -a.clone() } else { a.clone() })).collect();
                    seen.insert(key, rhs);
                    let k = out.add_constraint_in(c.group(), coeffs, c.rel, c.rhs.clone())?;
                    queue.push(k);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Reduced {
    pub lp: LinProgram,
    pub orbits: Orbits,
    /// Per full row: reduced row index and sign, or `None` for rows that vanish.
    row_class: Vec<Option<(usize, i32)>>,
    class_size: Vec<usize>,
}

/// Streams full-size rows into the orbit-reduced program, merging rows that
/// collapse onto the same reduced row. Lets callers build a reduced program
/// without materializing the full one.
#[derive(Debug)]
pub struct Collapser {
    lp: LinProgram,
    of_var: Vec<usize>,
    sizes: Vec<usize>,
    index: HashMap<(Key, Rational), usize>,
    class_size: Vec<usize>,
}

impl Collapser {
    pub fn new(orbits: &Orbits, sense: super::Sense) -> Self {
        Self {
            lp: LinProgram::new(orbits.count(), sense),
            of_var: orbits.of_var.clone(),
            sizes: orbits.sizes.clone(),
            index: HashMap::new(),
            class_size: Vec::new(),
        }
    }

    /// Sets the reduced objective from a full objective, which must be
    /// constant on orbits.
    pub fn set_objective(&mut self, full: &[(usize, Rational)]) -> Result<()> {
        let mut c = vec![zero(); self.of_var.len()];
        for (j, v) in full {
            c[*j] += v;
        }
        let mut obj: Vec<Option<Rational>> = vec![None; self.sizes.len()];
        for (j, cj) in c.into_iter().enumerate() {
            let o = self.of_var[j];
            match &obj[o] {
                None => obj[o] = Some(cj),
                Some(v) if *v == cj => {}
                Some(_) => return Err(Error::Invalid(format!("objective is not constant on the orbit of column {j}"))),
            }
        }
        self.lp.set_objective(
            obj.into_iter()
                .enumerate()
                .filter_map(|(o, v)| v.filter(|v| !v.is_zero()).map(|v| (o, v * int(self.sizes[o] as i64))))
                .collect(),
        )
    }

    /// Adds one full row. Returns the reduced row and sign, or `None` when the
    /// row collapses to `0 rel rhs` (which must then hold).
    pub fn push(&mut self, group: &str, coeffs: &[(usize, Rational)], rel: Relation, rhs: &Rational) -> Result<Option<(usize, i32)>> {
        let mut acc: HashMap<usize, Rational> = HashMap::new();
        for (j, a) in coeffs {
            *acc.entry(self.of_var[*j]).or_insert_with(zero) += a;
        }
        let coeffs: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        if coeffs.is_empty() {
            let ok = match rel {
                Relation::Le => !rhs.is_negative(),
                Relation::Eq => rhs.is_zero(),
                Relation::Ge => !rhs.is_positive(),
            };
            if !ok {
                return Err(Error::Infeasible("orbit reduction produced an unsatisfiable empty row".into()));
            }
            return Ok(None);
        }
        let (key, rhs, sign) = canonical(rel, coeffs, rhs);
        let k = match self.index.get(&(key.clone(), rhs.clone())) {
            Some(&k) => k,
            None => {
                let g = self.lp.group(group);
                let k = self.lp.add_constraint_in(g, key.1.clone(), key.0, rhs.clone())?;
                self.index.insert((key, rhs), k);
                self.class_size.push(0);
                k
            }
        };
        self.class_size[k] += 1;
        Ok(Some((k, sign)))
    }

    pub fn finish(self) -> LinProgram {
        self.lp
    }
}

impl super::RowSink for Collapser {
    fn push_row(&mut self, group: &str, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> Result<()> {
        self.push(group, &coeffs, rel, &rhs).map(|_| ())
    }
}

/// Builds the orbit-reduced program. All variables must carry the default
/// bounds `[0, ∞)` and the objective must be constant on orbits.
pub fn reduce(lp: &LinProgram, orbits: &Orbits) -> Result<Reduced> {
    let n = lp.num_vars();
    if orbits.of_var.len() != n {
        return Err(Error::Shape("orbit map does not match the program".into()));
    }
    for j in 0..n {
        let default = lp.lower()[j].as_ref().is_some_and(|l| l.is_zero()) && lp.upper()[j].is_none();
        if !default {
            return Err(Error::Invalid(format!("variable {j} has non-default bounds")));
        }
    }
    let mut col = Collapser::new(orbits, lp.sense());
    col.set_objective(lp.objective())?;
    for g in lp.groups().iter().skip(1) {
        col.lp.group(g);
    }
    let mut row_class = Vec::with_capacity(lp.constraints().len());
    for con in lp.constraints() {
        let name = &lp.groups()[con.group()];
        row_class.push(col.push(name, &con.coeffs, con.rel, &con.rhs)?);
    }
    let class_size = std::mem::take(&mut col.class_size);
    Ok(Reduced { lp: col.finish(), orbits: orbits.clone(), row_class, class_size })
}

impl Reduced {
    /// Lifts an optimal reduced solution to the full program.
    pub fn lift(&self, full: &LinProgram, sol: &LpSolution) -> Result<LpSolution> {
        if sol.status != Status::Optimal {
            return Ok(LpSolution { status: sol.status, value: zero(), primal: Vec::new(), dual: Vec::new() });
        }
        if full.constraints().len() != self.row_class.len() {
            return Err(Error::Shape("lift target is not the reduced program's source".into()));
        }
        let primal: Vec<Rational> = self.orbits.of_var.iter().map(|&o| sol.primal[o].clone()).collect();
        let dual = self
            .row_class
            .iter()
            .map(|rc| match rc {
                None => zero(),
                Some((k, s)) => {
                    let y = &sol.dual[*k] / int(self.class_size[*k] as i64);
                    if *s < 0 {
                        -y
                    } else {
                        y
                    }
                }
            })
            .collect();
        let value = full.objective_value(&primal);
        Ok(LpSolution { status: Status::Optimal, value, primal, dual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_exact, verify_certificate, Sense};
    use crate::rational::rat;

    #[test]
    fn symmetric_program_reduces_and_lifts() {
        // max x0+x1+x2+x3, x0+x1 <= 1, x2+x3 <= 1, x0+x2 <= 3/2, x1+x3 <= 3/2.
        let mut lp = LinProgram::new(4, Sense::Max);
        lp.set_objective((0..4).map(|j| (j, int(1))).collect()).unwrap();
        for (a, b, r) in [(0, 1, int(1)), (2, 3, int(1)), (0, 2, rat(3, 2)), (1, 3, rat(3, 2))] {
            lp.add_constraint(vec![(a, int(1)), (b, int(1))], Relation::Le, r).unwrap();
        }
        let swap = vec![1, 0, 3, 2];
        let full = close_rows(&lp, std::slice::from_ref(&swap)).unwrap();
        let orbits = Orbits::from_generators(4, &[swap]).unwrap();
        assert_eq!(orbits.count(), 2);
        let red = reduce(&full, &orbits).unwrap();
        let rs = solve_exact(&red.lp).unwrap();
        let lifted = red.lift(&full, &rs).unwrap();
        assert_eq!(lifted.value, int(2));
        assert!(verify_certificate(&full, &lifted));
    }

    #[test]
    fn non_symmetry_is_rejected() {
        let mut lp = LinProgram::new(2, Sense::Max);
        lp.set_objective(vec![(0, int(1)), (1, int(1))]).unwrap();
        lp.add_constraint(vec![(0, int(1))], Relation::Eq, int(1)).unwrap();
        lp.add_constraint(vec![(1, int(1))], Relation::Eq, int(2)).unwrap();
        assert!(close_rows(&lp, &[vec![1, 0]]).is_err());
    }
}
