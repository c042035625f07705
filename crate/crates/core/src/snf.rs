//! Smith normal form over the integers with unimodular transforms.

/// `u * a * v == diag` with `u`, `v` unimodular. `diag[i]` is the i-th
/// diagonal entry (nonnegative); entries past `rank` are zero.
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
    pub diag: Vec<i128>,
    pub rank: usize,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

pub fn smith_normal_form(a: &[Vec<i128>], ncols: usize) -> Snf {
    let m = a.len();
    let n = ncols;
    let mut d: Vec<Vec<i128>> = a.to_vec();
    let mut u = identity(m);
    let mut v = identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero |entry| in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if d[i][j] != 0 && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        for row in d.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }

        let mut clean = true;
        let p = d[t][t];
        for i in t + 1..m {
            let q = d[i][t].div_euclid(p);
            if q != 0 {
                for j in t..n {
                    d[i][j] -= q * d[t][j];
                }
                for j in 0..m {
                    u[i][j] -= q * u[t][j];
                }
            }
            if d[i][t] != 0 {
                clean = false;
            }
        }
        for j in t + 1..n {
            let q = d[t][j].div_euclid(p);
            if q != 0 {
                for row in d.iter_mut().skip(t) {
                    row[j] -= q * row[t];
                }
                for row in v.iter_mut() {
                    row[j] -= q * row[t];
                }
            }
            if d[t][j] != 0 {
                clean = false;
            }
        }
        if !clean {
            // a smaller remainder exists; pick it as the next pivot
            continue;
        }
        if d[t][t] < 0 {
            for j in t..n {
                d[t][j] = -d[t][j];
            }
            for j in 0..m {
                u[t][j] = -u[t][j];
            }
        }
        t += 1;
    }
    let diag: Vec<i128> = (0..m.min(n)).map(|i| d[i][i]).collect();
    let rank = diag.iter().take_while(|&&x| x != 0).count();
    Snf { u, v, diag, rank }
}
