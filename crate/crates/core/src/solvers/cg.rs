//! Conjugate gradient for small symmetric positive-definite systems.

/// Solves `A x = b` for SPD `A` given as a matvec, warm-starting from the
/// current `x`. Stops when the residual norm drops below `tol·‖b‖` or after
/// `cap` iterations. Returns the iteration count.
pub fn solve_spd<F>(apply: F, b: &[f64], x: &mut [f64], tol: f64, cap: usize) -> usize
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return 0;
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut p = r.clone();
    let mut rs = r.iter().map(|v| v * v).sum::<f64>();
    let target = (tol * b_norm) * (tol * b_norm);
    if rs <= target {
        return 0;
    }
    let mut ap = vec![0.0; n];
    for it in 0..cap {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            // A is PD by construction; a non-positive curvature value means
            // rounding has exhausted the search direction
            return it;
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = r.iter().map(|v| v * v).sum::<f64>();
        if rs_new <= target {
            return it + 1;
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    cap
}
