//! Smith normal form over the integers.

use std::fmt;

/// `Z^rank ⊕ Z/t₁ ⊕ … ⊕ Z/tₖ` with `t₁ | t₂ | …`, all `tᵢ > 1`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AbelianGroup {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup { rank, torsion: vec![] }
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        // combine torsion into invariant-factor form
        let n = self.torsion.len() + other.torsion.len();
        let mut m = vec![vec![0i64; n]; n];
        for (i, t) in self.torsion.iter().chain(other.torsion.iter()).enumerate() {
            m[i][i] = *t as i64;
        }
        let torsion = smith_diagonal(&m, n).into_iter().filter(|x| *x > 1).map(|x| x as u64).collect();
        AbelianGroup { rank: self.rank + other.rank, torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Diagonal of the Smith normal form of an `rows × cols` matrix, including
/// zeros, in divisibility order (nonzero entries first, nonnegative).
#[allow(clippy::needless_range_loop)]
pub fn smith_diagonal(m: &[Vec<i64>], cols: usize) -> Vec<i64> {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|x| *x as i128).collect()).collect();
    let rows = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if *v != 0 && best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            let p = a[t][t];
            for i in t + 1..rows {
                let f = a[i][t] / p;
                if f != 0 {
                    for j in t..cols {
                        a[i][j] -= f * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    changed = true;
                }
            }
            for j in t + 1..cols {
                let f = a[t][j] / p;
                if f != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= f * row[t];
                    }
                }
                if a[t][j] != 0 {
                    changed = true;
                }
            }
            if !changed {
                // divisibility of the rest of the block
                let mut bad = None;
                'scan: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if a[i][j] % p != 0 {
                            bad = Some(i);
                            break 'scan;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(i) => {
                        for j in t..cols {
                            let v = a[i][j];
                            a[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero of row/column t into the pivot
            let mut best = (t, t);
            for i in t..rows {
                if a[i][t] != 0 && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs() as i64);
        t += 1;
    }
    while diag.len() < rows.min(cols) {
        diag.push(0);
    }
    diag
}

/// Cokernel of an integer matrix with `cols` generators.
pub fn cokernel(m: &[Vec<i64>], cols: usize) -> AbelianGroup {
    let diag = smith_diagonal(m, cols);
    let nonzero = diag.iter().filter(|x| **x != 0).count();
    AbelianGroup {
        rank: cols - nonzero,
        torsion: diag.into_iter().filter(|x| *x > 1).map(|x| x as u64).collect(),
    }
}
