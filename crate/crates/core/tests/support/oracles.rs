//! Brute-force reference computations shared by the integration and
//! acceptance suites. Nothing here calls into the solver paths it checks.
#![allow(dead_code)]

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is (numerically) singular.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-11 {
            return None;
        }
        m.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        m[i][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Enumerates every basic solution of `{x ≥ 0 : Gx ≤ h}` (all `n`-subsets of
/// the `m + n` constraints taken as equalities) and keeps the best feasible one.
///
/// The polyhedron lies in the nonnegative orthant, so it is pointed: it is
/// nonempty iff it has a vertex. Unboundedness is detected by re-enumerating
/// with the box `x ≤ BOX` appended and comparing optima.
pub fn vertex_enumeration(c: &[f64], g: &[Vec<f64>], h: &[f64], tol: f64) -> OracleVerdict {
    const BOX: f64 = 1e6;
    let n = c.len();
    let Some(best) = best_vertex(c, g, h, tol) else {
        return OracleVerdict::Infeasible;
    };
    let mut boxed_g = g.to_vec();
    let mut boxed_h = h.to_vec();
    for j in 0..n {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        boxed_g.push(row);
        boxed_h.push(BOX);
    }
    let boxed = best_vertex(c, &boxed_g, &boxed_h, tol).expect("box keeps the feasible vertex");
    if boxed > best + 1e-6 * (1.0 + best.abs()) {
        OracleVerdict::Unbounded
    } else {
        OracleVerdict::Optimal(best)
    }
}

fn best_vertex(c: &[f64], g: &[Vec<f64>], h: &[f64], tol: f64) -> Option<f64> {
    let n = c.len();
    // rows 0..m are G, rows m..m+n are -x <= 0
    let mut all_rows: Vec<Vec<f64>> = g.to_vec();
    let mut all_rhs: Vec<f64> = h.to_vec();
    for j in 0..n {
        let mut row = vec![0.0; n];
        row[j] = -1.0;
        all_rows.push(row);
        all_rhs.push(0.0);
    }
    let total = all_rows.len();
    let mut best: Option<f64> = None;
    for subset in combinations(total, n) {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| all_rows[i].clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&i| all_rhs[i]).collect();
        let Some(x) = gauss_solve(&a, &b) else {
            continue;
        };
        let feasible = all_rows
            .iter()
            .zip(&all_rhs)
            .all(|(row, &rhs)| dot(row, &x) <= rhs + tol * (1.0 + rhs.abs()));
        if feasible {
            let v = dot(c, &x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues of a real 2×2 matrix as `(re, im)` pairs from trace and determinant.
pub fn eig2(m: [[f64; 2]; 2]) -> [(f64, f64); 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(tr / 2.0 - r, 0.0), (tr / 2.0 + r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(tr / 2.0, -r), (tr / 2.0, r)]
    }
}

/// Breadth-first reachability from node 0.
pub fn bfs_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Costate under the hypothesis `Bᵀp ≥ 0`: solves `(Aᵀ − Eᵀ Bᵀ) p = −s` directly.
pub fn costate_positive_sign(a: [[f64; 2]; 2], b: [f64; 2], e: [f64; 2], s: [f64; 2]) -> Vec<f64> {
    let m: Vec<Vec<f64>> = (0..2)
        .map(|i| (0..2).map(|j| a[j][i] - e[i] * b[j]).collect())
        .collect();
    gauss_solve(&m, &[-s[0], -s[1]]).expect("nonsingular")
}

/// Trapezoidal rule on a uniform or non-uniform grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}
