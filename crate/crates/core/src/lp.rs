//! Dense two-phase simplex with Bland's rule. Small problems only.

const TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

/// `min objective⊤x` subject to `eq` rows (`row⊤x = rhs`) and `le` rows
/// (`row⊤x ≤ rhs`). Variables flagged in `free` are unrestricted, the rest
/// are nonnegative.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub free: Vec<bool>,
    pub objective: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            free: vec![false; n],
            objective: vec![0.0; n],
            eq: Vec::new(),
            le: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.free.len()
    }

    pub fn solve(&self) -> LpOutcome {
        Simplex::build(self).run(self)
    }
}

struct Simplex {
    /// Rows `0..m` are constraints, row `m` the objective (reduced costs),
    /// last column the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    m: usize,
    /// Columns before `n_struct` are split variables and slacks.
    n_struct: usize,
    ncols: usize,
    /// Column of `x_j⁺` and, for free variables, `x_j⁻`.
    map: Vec<(usize, Option<usize>)>,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Simplex {
        let n = lp.n();
        let mut map = Vec::with_capacity(n);
        let mut col = 0;
        for &f in &lp.free {
            if f {
                map.push((col, Some(col + 1)));
                col += 2;
            } else {
                map.push((col, None));
                col += 1;
            }
        }
        let n_split = col;
        let n_slack = lp.le.len();
        let n_struct = n_split + n_slack;
        let rows: Vec<(&Vec<f64>, f64, Option<usize>)> = lp
            .eq
            .iter()
            .map(|(r, b)| (r, *b, None))
            .chain(lp.le.iter().enumerate().map(|(k, (r, b))| (r, *b, Some(n_split + k))))
            .collect();
        let m = rows.len();
        let ncols = n_struct + m;
        let mut t = vec![vec![0.0; ncols + 1]; m + 1];
        for (i, (row, rhs, slack)) in rows.iter().enumerate() {
            let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, &(p, q)) in map.iter().enumerate() {
                t[i][p] = sign * row[j];
                if let Some(q) = q {
                    t[i][q] = -sign * row[j];
                }
            }
            if let Some(s) = slack {
                t[i][*s] = sign;
            }
            t[i][n_struct + i] = 1.0;
            t[i][ncols] = sign * rhs;
        }
        // Phase-one objective: sum of artificials, priced out.
        for i in 0..m {
            for j in 0..=ncols {
                if j < n_struct || j == ncols {
                    t[m][j] -= t[i][j];
                }
            }
        }
        Simplex {
            t,
            basis: (n_struct..n_struct + m).collect(),
            m,
            n_struct,
            ncols,
            map,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.ncols + 1;
        let p = self.t[r][c];
        for j in 0..w {
            self.t[r][j] /= p;
        }
        let prow = self.t[r].clone();
        for i in 0..=self.m {
            if i != r {
                let f = self.t[i][c];
                if f != 0.0 {
                    for j in 0..w {
                        self.t[i][j] -= f * prow[j];
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland pivots over columns `< allowed`; false when unbounded.
    fn iterate(&mut self, allowed: usize) -> Option<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..allowed).find(|&j| self.t[self.m][j] < -TOL) else {
                return Some(true);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.m {
                let a = self.t[i][c];
                if a > TOL {
                    let ratio = self.t[i][self.ncols] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br - TOL || (ratio <= br + TOL && self.basis[i] < bb),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return Some(false),
            }
        }
        None
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        if self.iterate(self.n_struct).is_none() {
            return LpOutcome::Infeasible;
        }
        let scale = 1.0 + self.t.iter().take(self.m).map(|r| r[self.ncols].abs()).fold(0.0, f64::max);
        if -self.t[self.m][self.ncols] > TOL * scale {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..self.m {
            if self.basis[i] >= self.n_struct {
                if let Some(c) = (0..self.n_struct).find(|&j| self.t[i][j].abs() > TOL) {
                    self.pivot(i, c);
                }
            }
        }
        // Phase two objective.
        let w = self.ncols + 1;
        self.t[self.m] = vec![0.0; w];
        for (j, &(p, q)) in self.map.iter().enumerate() {
            self.t[self.m][p] = lp.objective[j];
            if let Some(q) = q {
                self.t[self.m][q] = -lp.objective[j];
            }
        }
        for i in 0..self.m {
            let b = self.basis[i];
            let f = self.t[self.m][b];
            if f != 0.0 {
                for j in 0..w {
                    self.t[self.m][j] -= f * self.t[i][j];
                }
            }
        }
        match self.iterate(self.n_struct) {
            None => return LpOutcome::Infeasible,
            Some(false) => return LpOutcome::Unbounded,
            Some(true) => {}
        }
        let mut col_val = vec![0.0; self.ncols];
        for i in 0..self.m {
            col_val[self.basis[i]] = self.t[i][self.ncols];
        }
        let x: Vec<f64> = self
            .map
            .iter()
            .map(|&(p, q)| col_val[p] - q.map_or(0.0, |q| col_val[q]))
            .collect();
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}
