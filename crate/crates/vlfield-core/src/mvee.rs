//! Minimum-volume origin-centered enclosing ellipsoid of a symmetric point
//! set.
//!
//! For points `w_1..w_m` spanning `R^d` the ellipsoid is `{x : x^T H x <= 1}`
//! with `H` maximizing `det H` subject to containment. With `d <= 3` the
//! shape matrix has at most six degrees of freedom, so the solver follows the
//! log-det barrier central path with damped Newton steps; first-order
//! multiplicative updates stall on direction sets that sample a smooth body
//! densely (many near-support points), while the barrier path is immune to
//! that degeneracy. Convergence is certified by a duality gap that is stable
//! in floating point: for any simplex weights `u` the design matrix
//! `X(u) = sum u_j w_j w_j^T` bounds every containment-feasible `H` through
//! `det H <= det((d X(u))^{-1})`, so with the barrier multipliers
//! `u_j ~ mu / s_j` the difference of the two log-determinants certifies
//! near-optimality of the returned ellipsoid. The reported `gap` is the
//! per-eigenvalue relative excess `exp(delta/d) - 1`, driven below `1e-9`
//! by default. The final rescale makes containment exact to rounding.

use crate::error::{Error, Result};
use crate::linalg::{sqrt_spd, sym_eigen, Mat};

pub const DEFAULT_GAP: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100_000;

/// Shape matrix `H` of the minimum-volume centered ellipsoid of `points`
/// together with `A = H^(1/2)`, so `{x : |A x| <= 1}` contains every point.
#[derive(Debug, Clone, Copy)]
pub struct Ellipsoid {
    pub h: Mat,
    pub a: Mat,
    pub iterations: usize,
    pub gap: f64,
}

pub fn mvee(d: usize, points: &[[f64; 3]]) -> Result<Ellipsoid> {
    mvee_with(d, points, DEFAULT_GAP, MAX_ITERATIONS)
}

pub fn mvee_with(d: usize, points: &[[f64; 3]], gap: f64, max_iter: usize) -> Result<Ellipsoid> {
    if points.len() < d {
        return Err(Error::Degenerate(format!(
            "{} points cannot span dimension {d}",
            points.len()
        )));
    }
    if d == 1 {
        let r = points.iter().fold(0.0f64, |m, p| m.max(p[0].abs()));
        if r <= 0.0 {
            return Err(Error::Degenerate("all points at the origin".into()));
        }
        let h = Mat::scalar(1.0 / (r * r));
        return Ok(Ellipsoid { h, a: Mat::scalar(1.0 / r), iterations: 0, gap: 0.0 });
    }

    // Prescale to unit peak magnitude; the shape matrix scales back at the
    // end.
    let peak = points
        .iter()
        .fold(0.0f64, |m, p| m.max(p[..d].iter().map(|x| x * x).sum::<f64>().sqrt()));
    if !(peak > 0.0) {
        return Err(Error::Degenerate("all points at the origin".into()));
    }
    let pts: Vec<[f64; 3]> = points
        .iter()
        .map(|p| [p[0] / peak, p[1] / peak, p[2] / peak])
        .collect();
    let span = gram_uniform(d, &pts);
    if span.inverse().is_err() {
        return Err(Error::Degenerate("point set does not span the space".into()));
    }

    let k = d * (d + 1) / 2;
    let m = pts.len();
    // Constraint rows: s_j = 1 - q_j . h with w^T H w = q(w) . h.
    let q: Vec<[f64; 6]> = pts.iter().map(|p| constraint_row(d, p)).collect();

    // Strictly feasible start: H = I/2 after prescaling.
    let mut h = [0.0f64; 6];
    for i in 0..d {
        h[i] = 0.5;
    }

    let mut mu = 1.0f64;
    let mut iterations = 0usize;
    let mut reached = f64::INFINITY;
    let mut best_h = h;
    'outer: while iterations < max_iter {
        // Damped Newton on f(h) = -ln det H(h) - mu sum ln s_j.
        for _ in 0..60 {
            if iterations >= max_iter {
                break;
            }
            iterations += 1;
            let hm = mat_from(d, &h);
            let h_inv = hm
                .inverse()
                .map_err(|_| Error::Degenerate("shape matrix collapsed".into()))?;
            let mut grad = [0.0f64; 6];
            let mut hess = [[0.0f64; 6]; 6];
            // -ln det part.
            for a in 0..k {
                grad[a] = -trace_prod(d, &h_inv, a);
            }
            for a in 0..k {
                let ma = sandwich(d, &h_inv, a);
                for b in 0..k {
                    hess[a][b] = inner_basis(d, &ma, b);
                }
            }
            // Barrier part.
            let mut s = vec![0.0f64; m];
            for j in 0..m {
                let acc = slack(&q[j], &h, k);
                if acc <= 0.0 {
                    return Err(Error::Degenerate("barrier infeasibility".into()));
                }
                s[j] = acc;
            }
            for j in 0..m {
                let c1 = mu / s[j];
                let c2 = c1 / s[j];
                for a in 0..k {
                    grad[a] += c1 * q[j][a];
                    for b in 0..k {
                        hess[a][b] += c2 * q[j][a] * q[j][b];
                    }
                }
            }
            let step = solve_sym(k, &mut hess, &grad)?;
            let decrement: f64 = (0..k).map(|a| grad[a] * step[a]).sum();
            // Backtracking toward feasibility and descent.
            let f0 = barrier_value(d, &h, &q, mu, m).unwrap_or(f64::INFINITY);
            let mut t = 1.0f64;
            let mut moved = false;
            for _ in 0..60 {
                let mut trial = h;
                for a in 0..k {
                    trial[a] -= t * step[a];
                }
                if let Some(f1) = barrier_value(d, &trial, &q, mu, m) {
                    if f1 <= f0 - 0.25 * t * decrement.abs().min(1e30) || f1 < f0 {
                        h = trial;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved || decrement.abs() <= 1e-13 * (1.0 + f0.abs()) {
                break;
            }
        }

        // Duality gap: the barrier multipliers give simplex weights u, and
        // det H <= det((d X(u))^{-1}) holds for every containment-feasible H.
        // Both sides are order-one log-determinants, so the certificate does
        // not suffer the slack cancellation that pollutes the raw design gap.
        // A short multiplicative polish sharpens u: the gap is smooth in u
        // through X(u) alone, so the weight-space degeneracy of dense
        // near-support samples does not slow it down.
        let mut u = vec![0.0f64; m];
        let mut sigma = 0.0f64;
        for j in 0..m {
            u[j] = mu / slack(&q[j], &h, k);
            sigma += u[j];
        }
        for w in u.iter_mut() {
            *w /= sigma;
        }
        let mut x = gram_weighted(d, &pts, &u);
        for _ in 0..96 {
            let Ok(x_inv) = x.inverse() else { break };
            for (j, p) in pts.iter().enumerate() {
                u[j] *= quad_form(&x_inv, &p[..d]) / d as f64;
            }
            x = gram_weighted(d, &pts, &u);
        }
        let hm = mat_from(d, &h);
        let mut worst_quad = 0.0f64;
        for p in &pts {
            worst_quad = worst_quad.max(quad_form(&hm, &p[..d]));
        }
        let upper = -(x.scale(d as f64).det().ln());
        let primal = hm.det().ln() - d as f64 * worst_quad.ln();
        let stage_gap = ((upper - primal) / d as f64).exp_m1().max(0.0);
        if stage_gap < reached {
            reached = stage_gap;
            best_h = h;
        }
        if reached <= gap {
            break 'outer;
        }
        mu /= 10.0;
        if mu < 1e-12 {
            break;
        }
    }

    if reached > gap {
        return Err(Error::NoConvergence(format!(
            "ellipsoid gap {reached:.3e} above {gap:.1e} after {iterations} iterations"
        )));
    }

    // Exact containment: rescale so the extreme point touches the boundary.
    let hm = mat_from(d, &best_h);
    let mut worst = 0.0f64;
    for p in &pts {
        worst = worst.max(quad_form(&hm, &p[..d]));
    }
    let h_final = hm.scale(1.0 / (worst * peak * peak));
    let a = sqrt_spd(&h_final)?;
    Ok(Ellipsoid { h: h_final, a, iterations, gap: reached })
}

fn barrier_value(d: usize, h: &[f64; 6], q: &[[f64; 6]], mu: f64, m: usize) -> Option<f64> {
    let k = d * (d + 1) / 2;
    let hm = mat_from(d, h);
    let (vals, _) = sym_eigen(&hm);
    let mut logdet = 0.0;
    for i in 0..d {
        if vals[i] <= 0.0 {
            return None;
        }
        logdet += vals[i].ln();
    }
    let mut f = -logdet;
    for row in q.iter().take(m) {
        let s = slack(row, h, k);
        if s <= 0.0 {
            return None;
        }
        f -= mu * s.ln();
    }
    Some(f)
}

/// Compensated residual `1 - q . h`. Near the central path the slacks reach
/// `1e-12` while the dot-product terms are order one, so a naive evaluation
/// loses three digits to cancellation; product errors are recovered with
/// fused multiply-adds and a Neumaier sum, and `1 - sum` is exact by
/// Sterbenz once the sum is near one.
fn slack(q: &[f64; 6], h: &[f64; 6], k: usize) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for a in 0..k {
        let p = q[a] * h[a];
        comp += q[a].mul_add(h[a], -p);
        let t = sum + p;
        comp += if sum.abs() >= p.abs() { (sum - t) + p } else { (p - t) + sum };
        sum = t;
    }
    (1.0 - sum) - comp
}

/// Linear coefficients of `h -> w^T H(h) w` in the packed parameterization
/// `[h11.., then off-diagonals]`.
fn constraint_row(d: usize, w: &[f64; 3]) -> [f64; 6] {
    let mut row = [0.0f64; 6];
    for i in 0..d {
        row[i] = w[i] * w[i];
    }
    let mut slot = d;
    for i in 0..d {
        for j in (i + 1)..d {
            row[slot] = 2.0 * w[i] * w[j];
            slot += 1;
        }
    }
    row
}

fn mat_from(d: usize, h: &[f64; 6]) -> Mat {
    let mut m = Mat::zeros(d);
    for i in 0..d {
        m.set(i, i, h[i]);
    }
    let mut slot = d;
    for i in 0..d {
        for j in (i + 1)..d {
            m.set(i, j, h[slot]);
            m.set(j, i, h[slot]);
            slot += 1;
        }
    }
    m
}

fn basis_elem(d: usize, alpha: usize) -> (usize, usize) {
    if alpha < d {
        return (alpha, alpha);
    }
    let mut slot = d;
    for i in 0..d {
        for j in (i + 1)..d {
            if slot == alpha {
                return (i, j);
            }
            slot += 1;
        }
    }
    unreachable!("basis index out of range")
}

/// `tr(M B_alpha)` for the packed symmetric basis.
fn trace_prod(d: usize, m: &Mat, alpha: usize) -> f64 {
    let (i, j) = basis_elem(d, alpha);
    if i == j {
        m.get(i, i)
    } else {
        2.0 * m.get(i, j)
    }
}

/// `M B_alpha M` for symmetric `M`.
fn sandwich(d: usize, m: &Mat, alpha: usize) -> Mat {
    let (i, j) = basis_elem(d, alpha);
    let mut out = Mat::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = m.get(r, i) * m.get(j, c);
            if i != j {
                acc += m.get(r, j) * m.get(i, c);
            }
            out.set(r, c, acc);
        }
    }
    out
}

/// `<M, B_beta>` Frobenius pairing with the packed basis.
fn inner_basis(d: usize, m: &Mat, beta: usize) -> f64 {
    let (i, j) = basis_elem(d, beta);
    if i == j {
        m.get(i, i)
    } else {
        m.get(i, j) + m.get(j, i)
    }
}

/// Gaussian elimination with partial pivoting for the k x k Newton system.
fn solve_sym(k: usize, a: &mut [[f64; 6]; 6], rhs: &[f64; 6]) -> Result<[f64; 6]> {
    let mut b = *rhs;
    for col in 0..k {
        let mut pivot = col;
        for row in (col + 1)..k {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Degenerate("singular Newton system".into()));
        }
        if pivot != col {
            a.swap(pivot, col);
            b.swap(pivot, col);
        }
        for row in (col + 1)..k {
            let factor = a[row][col] / a[col][col];
            for c2 in col..k {
                a[row][c2] -= factor * a[col][c2];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0f64; 6];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c2 in (col + 1)..k {
            acc -= a[col][c2] * x[c2];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

fn gram_uniform(d: usize, points: &[[f64; 3]]) -> Mat {
    let w = vec![1.0 / points.len() as f64; points.len()];
    gram_weighted(d, points, &w)
}

fn gram_weighted(d: usize, points: &[[f64; 3]], u: &[f64]) -> Mat {
    let mut x = Mat::zeros(d);
    for (p, &w) in points.iter().zip(u) {
        for i in 0..d {
            for j in 0..d {
                x.set(i, j, x.get(i, j) + w * p[i] * p[j]);
            }
        }
    }
    x
}

fn quad_form(m: &Mat, v: &[f64]) -> f64 {
    let mv = m.matvec(v);
    v.iter().zip(&mv[..v.len()]).map(|(a, b)| a * b).sum()
}
