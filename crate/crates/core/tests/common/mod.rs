//! Reference implementations shared by the integration tests. None of them
//! reuse library code.

#![allow(dead_code)]

use rand::Rng;

/// Minimum total cost over all injections of the smaller side into the
/// larger, summed in row order. Returns `(cost, row -> col)`.
pub fn brute_force_assignment(costs: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    let k = rows.min(cols);
    let mut best = (f64::INFINITY, vec![None; rows]);
    let mut current = vec![None; rows];
    let mut used = vec![false; cols];

    fn go(
        r: usize,
        assigned: usize,
        k: usize,
        costs: &[Vec<f64>],
        current: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut (f64, Vec<Option<usize>>),
    ) {
        let rows = costs.len();
        if r == rows {
            if assigned == k {
                let total: f64 = current
                    .iter()
                    .enumerate()
                    .filter_map(|(i, c)| c.map(|c| costs[i][c]))
                    .sum();
                if total < best.0 {
                    *best = (total, current.clone());
                }
            }
            return;
        }
        // Leave this row unassigned only if the remaining rows can still fill k.
        if rows - r > k - assigned {
            current[r] = None;
            go(r + 1, assigned, k, costs, current, used, best);
        }
        if assigned < k {
            for c in 0..used.len() {
                if !used[c] {
                    used[c] = true;
                    current[r] = Some(c);
                    go(r + 1, assigned + 1, k, costs, current, used, best);
                    used[c] = false;
                    current[r] = None;
                }
            }
        }
    }

    if k == 0 {
        return (0.0, best.1);
    }
    go(0, 0, k, costs, &mut current, &mut used, &mut best);
    best
}

pub fn row_order_cost(costs: &[Vec<f64>], by_row: &[Option<usize>]) -> f64 {
    by_row
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| costs[i][c]))
        .sum()
}

/// Random matrix up to 6x6; `integer` picks integers in 0..100, otherwise
/// multiples of 1/256 in [0, 100) so that every partial sum is exact.
pub fn random_cost_matrix<R: Rng>(rng: &mut R, integer: bool) -> Vec<Vec<f64>> {
    let rows = rng.random_range(1..=6);
    let cols = rng.random_range(1..=6);
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if integer {
                        f64::from(rng.random_range(0u32..100))
                    } else {
                        f64::from(rng.random_range(0u32..25_600)) / 256.0
                    }
                })
                .collect()
        })
        .collect()
}

pub type Mat4 = [[f64; 4]; 4];
pub type Vec4 = [f64; 4];

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Constant-velocity predict written out by hand on plain arrays.
pub fn reference_predict(x: &Vec4, p: &Mat4, dt: f64, q: f64) -> (Vec4, Mat4) {
    let x_new = [x[0] + dt * x[2], x[1] + dt * x[3], x[2], x[3]];
    let mut f = [[0.0; 4]; 4];
    for (i, row) in f.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    f[0][2] = dt;
    f[1][3] = dt;
    let mut p_new = mat_mul(&mat_mul(&f, p), &transpose(&f));
    let (pp, pv, vv) = (q * dt.powi(4) / 4.0, q * dt.powi(3) / 2.0, q * dt * dt);
    for a in 0..2 {
        p_new[a][a] += pp;
        p_new[a][a + 2] += pv;
        p_new[a + 2][a] += pv;
        p_new[a + 2][a + 2] += vv;
    }
    (x_new, p_new)
}

/// Position-only update with an explicit 2x2 inverse and the Joseph form.
pub fn reference_update(x: &Vec4, p: &Mat4, z: [f64; 2], r: f64) -> (Vec4, Mat4) {
    let s = [[p[0][0] + r, p[0][1]], [p[1][0], p[1][1] + r]];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let s_inv = [
        [s[1][1] / det, -s[0][1] / det],
        [-s[1][0] / det, s[0][0] / det],
    ];
    // K = P H' S^-1 where P H' is the first two columns of P.
    let mut k = [[0.0; 2]; 4];
    for i in 0..4 {
        for j in 0..2 {
            k[i][j] = p[i][0] * s_inv[0][j] + p[i][1] * s_inv[1][j];
        }
    }
    let nu = [z[0] - x[0], z[1] - x[1]];
    let mut x_new = *x;
    for i in 0..4 {
        x_new[i] += k[i][0] * nu[0] + k[i][1] * nu[1];
    }
    let mut a = [[0.0; 4]; 4];
    for i in 0..4 {
        a[i][i] = 1.0;
        a[i][0] -= k[i][0];
        a[i][1] -= k[i][1];
    }
    let mut p_new = mat_mul(&mat_mul(&a, p), &transpose(&a));
    for i in 0..4 {
        for j in 0..4 {
            p_new[i][j] += r * (k[i][0] * k[j][0] + k[i][1] * k[j][1]);
        }
    }
    (x_new, p_new)
}

/// Random state with a symmetric positive definite covariance `L L' + I`.
pub fn random_state<R: Rng>(rng: &mut R) -> (Vec4, Mat4) {
    let x = [
        rng.random_range(0.0..1280.0),
        rng.random_range(0.0..720.0),
        rng.random_range(-300.0..300.0),
        rng.random_range(-300.0..300.0),
    ];
    let mut l = [[0.0; 4]; 4];
    for (i, row) in l.iter_mut().enumerate() {
        for v in row.iter_mut().take(i + 1) {
            *v = rng.random_range(-10.0..10.0);
        }
    }
    let mut p = mat_mul(&l, &transpose(&l));
    for (i, row) in p.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    (x, p)
}

/// Largest entry-wise difference relative to the largest reference entry.
pub fn relative_error(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    got.iter()
        .zip(want)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

/// The flow check as a plain loop over timestamps: returns the indices of
/// events that warn.
pub fn flow_check_oracle(start: f64, t_duration: f64, events: &[f64]) -> Vec<usize> {
    let mut t_start = start;
    let mut warned = Vec::new();
    for (i, &t) in events.iter().enumerate() {
        let t_diff = t - t_start;
        if t_diff > t_duration {
            warned.push(i);
        }
        t_start = t;
    }
    warned
}
